"""Text formats for matrices, code descriptors, plans, responses and configs.

Every format is line oriented with a magic word first.  Header tokens are
``key=value``; polynomial coefficients are comma separated, constant term
first; a field element is written as ``<v1:v2:...:vm>`` with each v_i the
integer code of an F_q coordinate.  Base-field matrices are stored as RMX1
with m=1.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .fields import FieldTower, make_tower
from .staircase import StaircasePlan, plan


class FormatError(ValueError):
    pass


def _ints(text):
    return [int(v) for v in text.split(",")] if text else []


def _join(values):
    return ",".join(str(int(v)) for v in values)


def _element(vec):
    return "<" + ":".join(str(int(v)) for v in vec) + ">"


def _parse_element(tok, m):
    if not (tok.startswith("<") and tok.endswith(">")):
        raise FormatError(f"bad element token {tok!r}")
    vals = [int(v) for v in tok[1:-1].split(":")]
    if len(vals) != m:
        raise FormatError(f"element {tok!r} has {len(vals)} coordinates, expected {m}")
    return vals


def _header(line, magic, order=()):
    """Parse ``MAGIC k=v ...``; bare values fill the keys in ``order``."""
    parts = line.split()
    if not parts or parts[0] != magic:
        raise FormatError(f"expected a {magic} header, got {line[:40]!r}")
    out, pos = {}, 0
    for tok in parts[1:]:
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k] = v
        elif pos < len(order):
            out[order[pos]] = tok
            pos += 1
        else:
            raise FormatError(f"unexpected token {tok!r} in {magic} header")
    return out


def _tower_tokens(T: FieldTower):
    return f"p={T.p} s={T.s} m={T.m} basepoly={_join(T.base_poly)} extpoly={_join(T.ext_poly)}"


def _tower_from(h, basis=None):
    try:
        return make_tower(int(h["p"]), int(h["s"]), int(h["m"]),
                          base_poly=_ints(h["basepoly"]), ext_poly=_ints(h["extpoly"]), basis=basis)
    except KeyError as exc:
        raise FormatError(f"missing header key {exc.args[0]}") from None


def _check_entries(T, data):
    if data.size and (data.min() < 0 or data.max() >= T.q):
        raise FormatError(f"coordinates must lie in [0, {T.q})")


# RMX1 -------------------------------------------------------------------------

def dump_matrix(T: FieldTower, data) -> str:
    """RMX1 text of an (rows, cols, m) array; a 2-D array is a base matrix (m=1)."""
    data = np.asarray(data, dtype=np.int64)
    if data.ndim == 2:
        if T.m != 1:
            T = make_tower(T.p, T.s, 1, base_poly=T.base_poly)
        data = data[:, :, None]
    rows, cols, m = data.shape
    if m != T.m:
        raise ValueError(f"matrix has {m} coordinates per entry, tower has m={T.m}")
    lines = [f"RMX1 {_tower_tokens(T).replace(f' m={T.m} ', f' m={T.m} rows={rows} cols={cols} ')}"]
    for i in range(rows):
        lines.append(" ".join(_element(data[i, j]) for j in range(cols)))
    return "\n".join(lines) + "\n"


def _read_matrix(lines, pos):
    h = _header(lines[pos], "RMX1")
    T = _tower_from(h)
    rows, cols = int(h["rows"]), int(h["cols"])
    data = np.zeros((rows, cols, T.m), dtype=np.int64)
    for i in range(rows):
        toks = lines[pos + 1 + i].split() if pos + 1 + i < len(lines) else []
        if len(toks) != cols:
            raise FormatError(f"row {i} has {len(toks)} entries, expected {cols}")
        for j, tok in enumerate(toks):
            data[i, j] = _parse_element(tok, T.m)
    _check_entries(T, data)
    return T, data, pos + 1 + rows


def load_matrix(text: str):
    """Parse RMX1 text into (tower, (rows, cols, m) array)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    T, data, end = _read_matrix(lines, 0)
    if end != len(lines):
        raise FormatError("trailing content after matrix")
    return T, data


def load_base_matrix(text: str):
    """Parse an m=1 RMX1 matrix into (base field, 2-D array)."""
    T, data = load_matrix(text)
    if T.m != 1:
        raise FormatError("expected a base-field matrix (m=1)")
    return T.base, data[:, :, 0]


# GAB1 -------------------------------------------------------------------------

def dump_code(code) -> str:
    """One-line Gabidulin descriptor; points are the first n basis elements."""
    T = code.tower
    basis = ",".join(_element(row) for row in T.basis)
    return (f"GAB1 p={T.p} s={T.s} m={T.m} n={code.n} k={code.k} basepoly={_join(T.base_poly)} "
            f"extpoly={_join(T.ext_poly)} basis={basis}\n")


def load_code(text: str):
    from .codes import gabidulin
    h = _header(text.strip().splitlines()[0], "GAB1",
                ("p", "s", "m", "n", "k", "basepoly", "extpoly", "basis"))
    m = int(h["m"])
    basis = [_parse_element(tok, m) for tok in h["basis"].split(",")] if "basis" in h else None
    T = _tower_from(h, basis=basis)
    return gabidulin(T, int(h["n"]), int(h["k"]))


# STC1 -------------------------------------------------------------------------

def dump_plan(T: FieldTower, p: StaircasePlan) -> str:
    line = f"STC1 n={p.n} k1={p.k1} k2={p.k2} t0={p.t0} D={_join(p.D)} family={p.family}"
    if p.family == "product":
        line += f" l={p.l}"
    return line + f"\nTOWER {_tower_tokens(T)}\n"


def load_plan(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise FormatError("STC1 needs a plan line and a tower line")
    h = _header(lines[0], "STC1", ("n", "k1", "k2", "t0"))
    T = _tower_from(_header(lines[1], "TOWER"))
    family = h.get("family", "gabidulin")
    P = plan(int(h["n"]), int(h["k1"]), int(h["k2"]), int(h["t0"]), _ints(h["D"]),
             family=family, l=int(h.get("l", 1)), m=T.m)
    return T, P


# RSP1 -------------------------------------------------------------------------

def dump_responses(T: FieldTower, d, j, responses) -> str:
    """Preprocessed responses (P_j x d array): one RMX1 column fragment per node."""
    responses = np.asarray(responses, dtype=np.int64)
    if responses.shape[1] != d:
        raise ValueError(f"expected {d} columns, got {responses.shape[1]}")
    parts = [f"RSP1 d={d} j={j}\n"]
    for c in range(d):
        parts.append(dump_matrix(T, responses[:, c:c + 1]))
    return "".join(parts)


def load_responses(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    h = _header(lines[0], "RSP1")
    d, j = int(h["d"]), int(h["j"])
    pos, cols, T = 1, [], None
    for _ in range(d):
        T, data, pos = _read_matrix(lines, pos)
        cols.append(data)
    if pos != len(lines):
        raise FormatError("trailing content after responses")
    if d == 0:
        raise FormatError("RSP1 needs at least one column")
    return T, d, j, np.concatenate(cols, axis=1)


# key=value configs -------------------------------------------------------------

def parse_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"config line {n}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def dump_config(cfg: dict) -> str:
    buf = io.StringIO()
    for k, v in cfg.items():
        if isinstance(v, (list, tuple)):
            v = _join(v)
        buf.write(f"{k} = {v}\n")
    return buf.getvalue()


def read_text(path) -> str:
    return Path(path).read_text()


def write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
