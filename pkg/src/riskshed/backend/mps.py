"""Fixed-field MPS export for linear and mixed-binary programs.

The MPS format has no objective-sense record; files written here are always
minimization problems, stated in a leading comment.  Values use 10
significant digits, the most that fits the classic 12-character value field.
"""
from __future__ import annotations

import numpy as np

_SENSE_CODE = {"<=": "L", ">=": "G", "=": "E"}


def _num(v):
    s = f"{v:.10g}"
    return s if len(s) <= 12 else f"{v:.6g}"


def _card(f1="", f2="", f3="", f4="", f5="", f6=""):
    # Classic fixed fields: 2-3, 5-12, 15-22, 25-36, 40-47, 50-61.
    line = f" {f1:<2} {f2:<8}  {f3:<8}  {f4:<12}   {f5:<8}  {f6:<12}"
    return line.rstrip()


def write_mps(program, name="RISKSHED"):
    """Serialize a LinearProgram or MixedBinaryProgram to an MPS string."""
    from .program import LinearProgram, MixedBinaryProgram

    if isinstance(program, MixedBinaryProgram):
        lp, binary = program.lp, program.binary
    elif isinstance(program, LinearProgram):
        lp, binary = program, np.zeros(program.num_vars, dtype=bool)
    else:
        raise TypeError(f"cannot export {type(program).__name__}")

    cname = [f"C{j:07d}" for j in range(lp.num_vars)]
    rname = [f"R{i:07d}" for i in range(lp.num_rows)]

    out = [
        "* Minimization problem; no OBJSENSE record is emitted.",
        f"NAME          {name[:8]:<8}".rstrip(),
        "ROWS",
        _card("N", "OBJ"),
    ]
    for i in range(lp.num_rows):
        out.append(_card(_SENSE_CODE[lp.senses[i]], rname[i]))

    out.append("COLUMNS")
    marker = 0
    in_int = False
    for j in range(lp.num_vars):
        if bool(binary[j]) != in_int:
            kind = "'INTORG'" if binary[j] else "'INTEND'"
            out.append(_card("", f"M{marker:07d}", "'MARKER'", "", kind))
            in_int = bool(binary[j])
            marker += 1
        entries = []
        if lp.objective[j] != 0.0:
            entries.append(("OBJ", lp.objective[j]))
        for i in range(lp.num_rows):
            if lp.lhs[i, j] != 0.0:
                entries.append((rname[i], lp.lhs[i, j]))
        if not entries:
            entries.append(("OBJ", 0.0))
        for a, b in zip(entries[::2], [*entries[1::2], None]):
            if b is None:
                out.append(_card("", cname[j], a[0], _num(a[1])))
            else:
                out.append(_card("", cname[j], a[0], _num(a[1]), b[0], _num(b[1])))
    if in_int:
        out.append(_card("", f"M{marker:07d}", "'MARKER'", "", "'INTEND'"))

    out.append("RHS")
    for i in range(lp.num_rows):
        if lp.rhs[i] != 0.0:
            out.append(_card("", "RHS", rname[i], _num(lp.rhs[i])))

    out.append("BOUNDS")
    for j in range(lp.num_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        if binary[j]:
            out.append(_card("BV", "BND", cname[j]))
            continue
        if lo == 0.0 and not np.isfinite(hi):
            continue   # default bound
        if not np.isfinite(lo) and not np.isfinite(hi):
            out.append(_card("FR", "BND", cname[j]))
            continue
        if not np.isfinite(lo):
            out.append(_card("MI", "BND", cname[j]))
        elif lo != 0.0:
            out.append(_card("LO", "BND", cname[j], _num(lo)))
        if np.isfinite(hi):
            out.append(_card("UP", "BND", cname[j], _num(hi)))

    out.append("ENDATA")
    return "\n".join(out) + "\n"
