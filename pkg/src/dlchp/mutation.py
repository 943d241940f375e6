"""Seeded single-step mutations of proof scripts, for checking that the kernel notices them."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass

from .axioms import registry
from .kernel import check_proof, parse_script
from .syntax import normalize_sets
from .textio import ParseError

OPERATORS = ("delete", "ref", "literal", "negate", "channel", "axiom", "binding")

_FORMULA_KINDS = ("taut", "hyp", "setfact", "tracefact", "arith", "premise")


@dataclass(frozen=True)
class Mutation:
    operator: str
    line: int
    before: str
    after: str | None      # None when the line was deleted


@dataclass(frozen=True)
class MutationOutcome:
    mutation: Mutation
    verdict: str           # rejected | changed | silent
    detail: str


def _step_lines(lines):
    return [i for i, l in enumerate(lines) if l.lstrip().startswith("step ")]


def _step_id(line: str) -> str:
    return line.split()[1]


def _try(op, line, lines, idx, rng):
    words = line.split()
    kind = words[2] if len(words) > 2 else ""
    if op == "delete":
        return None
    if op == "ref":
        earlier = [_step_id(lines[j]) for j in _step_lines(lines) if j < idx]
        refs = _ref_positions(line, kind)
        if not refs or len(earlier) < 2:
            return False
        start, end = rng.choice(refs)
        old = line[start:end]
        choices = [e for e in earlier if e != old]
        return line[:start] + rng.choice(choices) + line[end:]
    if op == "literal":
        nums = list(re.finditer(r"(?<![\w.])\d+(?![\w/])", line))
        if not nums:
            return False
        m = rng.choice(nums)
        return line[:m.start()] + str(int(m.group()) + 1) + line[m.end():]
    if op == "negate":
        if kind not in _FORMULA_KINDS:
            return False
        head = " ".join(words[:3])
        rest = line.split(None, 3)[3]
        body, tail = (rest.split(" using ", 1) + [""])[:2] if " using " in rest else (rest, "")
        out = f"{head} !({body})"
        return out + (f" using {tail}" if tail else "")
    if op == "channel":
        hits = [m for m in re.finditer(r"\bch\b", line)]
        if not hits:
            return False
        m = rng.choice(hits)
        return line[:m.start()] + "dh" + line[m.end():]
    if op == "axiom":
        if kind not in ("axiom", "rule"):
            return False
        entries = registry()
        same = [k for k, e in entries.items() if e.kind == entries.get(words[3], e).kind and k != words[3]]
        return line.replace(f" {words[3]}", f" {rng.choice(sorted(same))}", 1)
    if op == "binding":
        if "{" not in line or kind not in ("us", "rule"):
            return False
        open_, close = line.index("{", line.index(kind)), line.rindex("}")
        inner = line[open_ + 1:close]
        parts = _split_top(inner)
        if not parts:
            return False
        parts.pop(rng.randrange(len(parts)))
        return line[:open_ + 1] + ", ".join(p.strip() for p in parts) + line[close:]
    raise ValueError(op)


def _split_top(s: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in s:
        if ch in "({[":
            depth += 1
        elif ch in ")}]":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur)
    return out


def _ref_positions(line: str, kind: str) -> list[tuple[int, int]]:
    words = list(re.finditer(r"\S+", line))
    if kind in ("us", "mp", "ce", "rename"):
        n = {"us": 1, "mp": 2, "ce": 1, "rename": 1}[kind]
        return [(w.start(), w.end()) for w in words[3:3 + n]]
    if kind in ("taut", "rule"):
        if kind == "taut":
            if " using " not in line:
                return []
            cut = line.index(" using ") + 7
        else:
            cut = line.rindex("}") + 1
        return [(m.start() + cut, m.end() + cut) for m in re.finditer(r"\S+", line[cut:])]
    return []


def mutate(text: str, rng: random.Random) -> Mutation:
    """One random single-step mutation of `text` (never touches the qed line)."""
    lines = text.splitlines()
    steps = _step_lines(lines)
    while True:
        op = rng.choice(OPERATORS)
        idx = rng.choice(steps)
        out = _try(op, lines[idx], lines, idx, rng)
        if out is False or out == lines[idx]:
            continue
        return Mutation(op, idx + 1, lines[idx], out)


def apply(text: str, m: Mutation) -> str:
    lines = text.splitlines()
    if m.after is None:
        del lines[m.line - 1]
    else:
        lines[m.line - 1] = m.after
    return "\n".join(lines) + "\n"


def _signature(rep):
    def forms(ids):
        return sorted(repr(normalize_sets(rep.formulas[i])) for i in ids)

    return (repr(normalize_sets(rep.conclusion)), forms(rep.hypotheses), forms(rep.premises), len(rep.tainted))


def judge(original: str, m: Mutation, library=None, base=None) -> MutationOutcome:
    base = base or check_proof(parse_script(original), library)
    try:
        rep = check_proof(parse_script(apply(original, m)), library)
    except ParseError as e:
        return MutationOutcome(m, "rejected", f"parse error: {e}")
    if not rep.ok:
        return MutationOutcome(m, "rejected", rep.summary())
    same = _signature(rep) == _signature(base)
    return MutationOutcome(m, "silent" if same else "changed", rep.summary())


def mutation_campaign(text: str, n: int = 50, seed: int = 0, library=None) -> list[MutationOutcome]:
    rng = random.Random(seed)
    base = check_proof(parse_script(text), library)
    if not base.ok:
        raise ValueError(f"the unmutated script does not check: {base.summary()}")
    return [judge(text, mutate(text, rng), library, base) for _ in range(n)]
