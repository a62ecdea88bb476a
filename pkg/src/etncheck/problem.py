"""Problem-file schema: loading, validation, normalization and fetching.

Problem files are TOML with all numeric analytic data as decimal *strings*
(never binary floats), so fixtures stay faithful to published digits.  The
loader validates the schema and reports the offending field path; the
serializer emits a normalized, deterministic rendering, and one
load/serialize pass is idempotent.

The optional metadata fetcher performs a single GET against a user-supplied
REST endpoint returning labeled curve metadata as JSON; it only ever fills
the curve block (hypotheses inputs) and is never required.
"""

from __future__ import annotations

import json
import math
import urllib.parse
import urllib.request
from dataclasses import dataclass, replace
from typing import Any, Mapping, Optional

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

__all__ = [
    "ProblemFormatError",
    "FetchError",
    "HeaderBlock",
    "CurveBlock",
    "RatioEntry",
    "BsdFieldEntry",
    "AnalyticBlock",
    "HeightEntry",
    "TransitionEntry",
    "ArithmeticBlock",
    "ProblemFile",
    "load_problem",
    "parse_problem",
    "serialize_problem",
    "fetch_metadata",
    "relabel_problem",
    "twist_problem",
]

FORMAT_NAME = "etncheck-problem"
FORMAT_VERSION = 1


class ProblemFormatError(ValueError):
    """Schema violation; carries the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class FetchError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Typed blocks.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeaderBlock:
    p: int
    n: int
    q: Optional[int]
    primitive_root: Optional[int]
    digits: int
    sha_p_trivial: bool
    finiteness_asserted: bool
    intermediate_sha_asserted: bool
    provenance: str = ""


@dataclass(frozen=True)
class CurveBlock:
    label: str
    dimension: int
    conductor: int
    torsion_order: int
    dual_torsion_order: int
    tamagawa: dict[str, int]
    bad_reduction: tuple[int, ...]
    residue_counts: dict[str, int]
    rank: Optional[int] = None


@dataclass(frozen=True)
class RatioEntry:
    j: int
    re: str
    im: str


@dataclass(frozen=True)
class BsdFieldEntry:
    label: str
    leading: str
    abs_discriminant: int
    height_determinant: str
    period_product: str


@dataclass(frozen=True)
class AnalyticBlock:
    mode: str  # "ratios" | "leading_terms"
    ratios: tuple[RatioEntry, ...] = ()
    leading_terms: tuple[RatioEntry, ...] = ()
    omega: Optional[str] = None
    truncated: bool = True
    vanishing_orders: Optional[dict[int, int]] = None
    supplied_tau_star: tuple[RatioEntry, ...] = ()
    bsd_fields: tuple[BsdFieldEntry, ...] = ()


@dataclass(frozen=True)
class HeightEntry:
    row: tuple[int, int]
    tau: int
    col: tuple[int, int]
    value: str


@dataclass(frozen=True)
class TransitionEntry:
    row: tuple[int, int]
    col: tuple[int, int]
    coeffs: tuple[str, ...]


@dataclass(frozen=True)
class ArithmeticBlock:
    ranks: Optional[tuple[int, ...]] = None
    shape: Optional[tuple[int, ...]] = None
    heights_digits: Optional[int] = None
    heights: tuple[HeightEntry, ...] = ()
    transition: tuple[TransitionEntry, ...] = ()


@dataclass(frozen=True)
class ProblemFile:
    header: HeaderBlock
    curve: CurveBlock
    analytic: AnalyticBlock
    arithmetic: ArithmeticBlock


# ---------------------------------------------------------------------------
# Validation helpers.
# ---------------------------------------------------------------------------


def _need(table: Mapping[str, Any], key: str, kind, path: str):
    if key not in table:
        raise ProblemFormatError(f"{path}.{key}", "missing required field")
    value = table[key]
    if kind is int and isinstance(value, bool):
        raise ProblemFormatError(f"{path}.{key}", "expected an integer, got a boolean")
    if not isinstance(value, kind):
        raise ProblemFormatError(
            f"{path}.{key}",
            f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}",
        )
    return value


def _opt(table: Mapping[str, Any], key: str, kind, path: str, default=None):
    if key not in table:
        return default
    return _need(table, key, kind, path)


def _decimal(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ProblemFormatError(path, "decimal values must be strings")
    try:
        from fractions import Fraction

        Fraction(value.strip())
    except (ValueError, ZeroDivisionError):
        raise ProblemFormatError(path, f"not a decimal string: {value!r}") from None
    return value.strip()


def _char_indexed(entries: Any, order: int, path: str) -> tuple[RatioEntry, ...]:
    if not isinstance(entries, list):
        raise ProblemFormatError(path, "expected an array of tables")
    out = []
    seen = set()
    for k, entry in enumerate(entries):
        epath = f"{path}[{k}]"
        j = _need(entry, "j", int, epath)
        if not 0 <= j < order:
            raise ProblemFormatError(f"{epath}.j", f"character index {j} out of range 0..{order - 1}")
        if j in seen:
            raise ProblemFormatError(f"{epath}.j", f"duplicate character index {j}")
        seen.add(j)
        re = _decimal(_need(entry, "re", str, epath), f"{epath}.re")
        im = _decimal(_opt(entry, "im", str, epath, "0"), f"{epath}.im")
        out.append(RatioEntry(j, re, im))
    return tuple(sorted(out, key=lambda e: e.j))


# ---------------------------------------------------------------------------
# Parsing.
# ---------------------------------------------------------------------------


def parse_problem(text: str) -> ProblemFile:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ProblemFormatError("(file)", f"TOML parse error: {exc}") from None

    if doc.get("format") != FORMAT_NAME:
        raise ProblemFormatError("format", f"expected {FORMAT_NAME!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise ProblemFormatError("version", f"expected {FORMAT_VERSION}")

    h = _need(doc, "header", dict, "(file)")
    p = _need(h, "p", int, "header")
    n = _need(h, "n", int, "header")
    if p < 3 or p % 2 == 0:
        raise ProblemFormatError("header.p", "p must be an odd prime")
    order = p**n
    header = HeaderBlock(
        p=p,
        n=n,
        q=_opt(h, "q", int, "header"),
        primitive_root=_opt(h, "primitive_root", int, "header"),
        digits=_need(h, "digits", int, "header"),
        sha_p_trivial=_need(h, "sha_p_trivial", bool, "header"),
        finiteness_asserted=_opt(h, "finiteness_asserted", bool, "header", False),
        intermediate_sha_asserted=_opt(h, "intermediate_sha_asserted", bool, "header", False),
        provenance=_opt(h, "provenance", str, "header", ""),
    )
    if header.q is not None:
        if (header.q - 1) % order:
            raise ProblemFormatError("header.q", f"q = {header.q} is not 1 mod {order}")
        if header.primitive_root is None:
            raise ProblemFormatError("header.primitive_root", "required when q is given")

    c = _need(doc, "curve", dict, "(file)")
    tam = {str(k): v for k, v in _opt(c, "tamagawa", dict, "curve", {}).items()}
    for k, v in tam.items():
        if not isinstance(v, int):
            raise ProblemFormatError(f"curve.tamagawa.{k}", "Tamagawa numbers must be integers")
    res = {str(k): v for k, v in _opt(c, "residue_counts", dict, "curve", {}).items()}
    for k, v in res.items():
        if not isinstance(v, int):
            raise ProblemFormatError(f"curve.residue_counts.{k}", "residue counts must be integers")
    curve = CurveBlock(
        label=_need(c, "label", str, "curve"),
        dimension=_opt(c, "dimension", int, "curve", 1),
        conductor=_need(c, "conductor", int, "curve"),
        torsion_order=_need(c, "torsion_order", int, "curve"),
        dual_torsion_order=_opt(c, "dual_torsion_order", int, "curve", _need(c, "torsion_order", int, "curve")),
        tamagawa=tam,
        bad_reduction=tuple(_opt(c, "bad_reduction", list, "curve", [])),
        residue_counts=res,
        rank=_opt(c, "rank", int, "curve"),
    )
    if header.q is not None and str(header.q) not in curve.residue_counts:
        raise ProblemFormatError("curve.residue_counts", f"missing count for ramified place {header.q}")

    a = _need(doc, "analytic", dict, "(file)")
    mode = _need(a, "mode", str, "analytic")
    if mode not in ("ratios", "leading_terms"):
        raise ProblemFormatError("analytic.mode", f"unknown mode {mode!r}")
    ratios: tuple[RatioEntry, ...] = ()
    leading: tuple[RatioEntry, ...] = ()
    omega = None
    if mode == "ratios":
        if "ratio" not in a:
            raise ProblemFormatError("analytic.ratio", "missing required field")
        ratios = _char_indexed(a["ratio"], order, "analytic.ratio")
        if len(ratios) != order:
            raise ProblemFormatError("analytic.ratio", f"need all {order} characters, got {len(ratios)}")
    else:
        if "leading_term" not in a:
            raise ProblemFormatError("analytic.leading_term", "missing required field")
        leading = _char_indexed(a["leading_term"], order, "analytic.leading_term")
        if len(leading) != order:
            raise ProblemFormatError(
                "analytic.leading_term", f"need all {order} characters, got {len(leading)}"
            )
        omega = _decimal(_need(a, "omega", str, "analytic"), "analytic.omega")
    orders = None
    if "vanishing_orders" in a:
        raw = _need(a, "vanishing_orders", dict, "analytic")
        orders = {}
        for k, v in raw.items():
            try:
                j = int(k)
            except ValueError:
                raise ProblemFormatError(f"analytic.vanishing_orders.{k}", "keys must be character indices") from None
            if not isinstance(v, int) or v < 0:
                raise ProblemFormatError(f"analytic.vanishing_orders.{k}", "orders must be nonnegative integers")
            orders[j] = v
        if set(orders) != set(range(order)):
            raise ProblemFormatError("analytic.vanishing_orders", f"need all {order} characters")
    supplied = ()
    if "supplied_tau_star" in a:
        supplied = _char_indexed(a["supplied_tau_star"], order, "analytic.supplied_tau_star")
    bsd = []
    for k, entry in enumerate(_opt(a, "bsd_field", list, "analytic", [])):
        epath = f"analytic.bsd_field[{k}]"
        bsd.append(
            BsdFieldEntry(
                label=_need(entry, "label", str, epath),
                leading=_decimal(_need(entry, "leading", str, epath), f"{epath}.leading"),
                abs_discriminant=_need(entry, "abs_discriminant", int, epath),
                height_determinant=_decimal(
                    _need(entry, "height_determinant", str, epath), f"{epath}.height_determinant"
                ),
                period_product=_decimal(_need(entry, "period_product", str, epath), f"{epath}.period_product"),
            )
        )
    analytic = AnalyticBlock(
        mode=mode,
        ratios=ratios,
        leading_terms=leading,
        omega=omega,
        truncated=_opt(a, "truncated", bool, "analytic", True),
        vanishing_orders=orders,
        supplied_tau_star=tuple(supplied),
        bsd_fields=tuple(bsd),
    )

    ar = _need(doc, "arithmetic", dict, "(file)")
    ranks = _opt(ar, "ranks", list, "arithmetic")
    shape = _opt(ar, "shape", list, "arithmetic")
    if ranks is None and shape is None and orders is None:
        raise ProblemFormatError("arithmetic", "need ranks, shape, or analytic.vanishing_orders")
    for name, seq in (("ranks", ranks), ("shape", shape)):
        if seq is not None:
            if len(seq) != n + 1:
                raise ProblemFormatError(f"arithmetic.{name}", f"need {n + 1} levels, got {len(seq)}")
            if any(not isinstance(v, int) or v < 0 for v in seq):
                raise ProblemFormatError(f"arithmetic.{name}", "entries must be nonnegative integers")
    heights: list[HeightEntry] = []
    hdigits = None
    if "heights" in ar:
        ht = _need(ar, "heights", dict, "arithmetic")
        hdigits = _need(ht, "digits", int, "arithmetic.heights")
        for k, entry in enumerate(_need(ht, "entry", list, "arithmetic.heights")):
            epath = f"arithmetic.heights.entry[{k}]"
            row = _need(entry, "row", list, epath)
            col = _need(entry, "col", list, epath)
            if len(row) != 2 or len(col) != 2:
                raise ProblemFormatError(epath, "row and col must be [level, index] pairs")
            heights.append(
                HeightEntry(
                    row=(row[0], row[1]),
                    tau=_need(entry, "tau", int, epath),
                    col=(col[0], col[1]),
                    value=_decimal(_need(entry, "value", str, epath), f"{epath}.value"),
                )
            )
    transition: list[TransitionEntry] = []
    if "transition" in ar:
        tr = _need(ar, "transition", dict, "arithmetic")
        for k, entry in enumerate(_need(tr, "entry", list, "arithmetic.transition")):
            epath = f"arithmetic.transition.entry[{k}]"
            row = _need(entry, "row", list, epath)
            col = _need(entry, "col", list, epath)
            coeffs = _need(entry, "coeffs", list, epath)
            if len(coeffs) != order:
                raise ProblemFormatError(f"{epath}.coeffs", f"need {order} coefficients")
            transition.append(
                TransitionEntry(
                    row=(row[0], row[1]),
                    col=(col[0], col[1]),
                    coeffs=tuple(_decimal(str(x), f"{epath}.coeffs[{i}]") for i, x in enumerate(coeffs)),
                )
            )
    arithmetic = ArithmeticBlock(
        ranks=tuple(ranks) if ranks is not None else None,
        shape=tuple(shape) if shape is not None else None,
        heights_digits=hdigits,
        heights=tuple(heights),
        transition=tuple(transition),
    )
    if mode == "leading_terms" and not heights and shape is None and ranks is None:
        raise ProblemFormatError("arithmetic.heights", "leading-term mode requires a height table")

    return ProblemFile(header, curve, analytic, arithmetic)


def load_problem(path) -> ProblemFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem(fh.read())


# ---------------------------------------------------------------------------
# Deterministic serialization.
# ---------------------------------------------------------------------------


def _toml_str(s: str) -> str:
    return json.dumps(s)


def serialize_problem(pf: ProblemFile) -> str:
    lines: list[str] = []
    w = lines.append
    w(f"format = {_toml_str(FORMAT_NAME)}")
    w(f"version = {FORMAT_VERSION}")
    w("")
    w("[header]")
    h = pf.header
    w(f"p = {h.p}")
    w(f"n = {h.n}")
    if h.q is not None:
        w(f"q = {h.q}")
    if h.primitive_root is not None:
        w(f"primitive_root = {h.primitive_root}")
    w(f"digits = {h.digits}")
    w(f"sha_p_trivial = {str(h.sha_p_trivial).lower()}")
    w(f"finiteness_asserted = {str(h.finiteness_asserted).lower()}")
    w(f"intermediate_sha_asserted = {str(h.intermediate_sha_asserted).lower()}")
    if h.provenance:
        w(f"provenance = {_toml_str(h.provenance)}")
    w("")
    w("[curve]")
    c = pf.curve
    w(f"label = {_toml_str(c.label)}")
    w(f"dimension = {c.dimension}")
    w(f"conductor = {c.conductor}")
    if c.rank is not None:
        w(f"rank = {c.rank}")
    w(f"torsion_order = {c.torsion_order}")
    w(f"dual_torsion_order = {c.dual_torsion_order}")
    w(f"bad_reduction = [{', '.join(str(v) for v in c.bad_reduction)}]")
    if c.tamagawa:
        w("")
        w("[curve.tamagawa]")
        for k in sorted(c.tamagawa, key=int):
            w(f'"{k}" = {c.tamagawa[k]}')
    if c.residue_counts:
        w("")
        w("[curve.residue_counts]")
        for k in sorted(c.residue_counts, key=int):
            w(f'"{k}" = {c.residue_counts[k]}')
    w("")
    w("[analytic]")
    a = pf.analytic
    w(f"mode = {_toml_str(a.mode)}")
    if a.mode == "leading_terms":
        w(f"omega = {_toml_str(a.omega)}")
        w(f"truncated = {str(a.truncated).lower()}")
    if a.vanishing_orders is not None:
        w("")
        w("[analytic.vanishing_orders]")
        for j in sorted(a.vanishing_orders):
            w(f'"{j}" = {a.vanishing_orders[j]}')
    for name, entries in (("ratio", a.ratios), ("leading_term", a.leading_terms), ("supplied_tau_star", a.supplied_tau_star)):
        for e in entries:
            w("")
            w(f"[[analytic.{name}]]")
            w(f"j = {e.j}")
            w(f"re = {_toml_str(e.re)}")
            w(f"im = {_toml_str(e.im)}")
    for e in pf.analytic.bsd_fields:
        w("")
        w("[[analytic.bsd_field]]")
        w(f"label = {_toml_str(e.label)}")
        w(f"leading = {_toml_str(e.leading)}")
        w(f"abs_discriminant = {e.abs_discriminant}")
        w(f"height_determinant = {_toml_str(e.height_determinant)}")
        w(f"period_product = {_toml_str(e.period_product)}")
    w("")
    w("[arithmetic]")
    ar = pf.arithmetic
    if ar.ranks is not None:
        w(f"ranks = [{', '.join(str(v) for v in ar.ranks)}]")
    if ar.shape is not None:
        w(f"shape = [{', '.join(str(v) for v in ar.shape)}]")
    if ar.heights:
        w("")
        w("[arithmetic.heights]")
        w(f"digits = {ar.heights_digits}")
        for e in sorted(ar.heights, key=lambda e: (e.row, e.col, e.tau)):
            w("")
            w("[[arithmetic.heights.entry]]")
            w(f"row = [{e.row[0]}, {e.row[1]}]")
            w(f"tau = {e.tau}")
            w(f"col = [{e.col[0]}, {e.col[1]}]")
            w(f"value = {_toml_str(e.value)}")
    if ar.transition:
        w("")
        w("[arithmetic.transition]")
        for e in sorted(ar.transition, key=lambda e: (e.row, e.col)):
            w("")
            w("[[arithmetic.transition.entry]]")
            w(f"row = [{e.row[0]}, {e.row[1]}]")
            w(f"col = [{e.col[0]}, {e.col[1]}]")
            w(f"coeffs = [{', '.join(_toml_str(x) for x in e.coeffs)}]")
    w("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Relabeling transforms (generator / primitive-root / Galois twist).
# ---------------------------------------------------------------------------


def _reindex_entries(entries: tuple[RatioEntry, ...], order: int, c: int) -> tuple[RatioEntry, ...]:
    out = [RatioEntry((e.j * c) % order, e.re, e.im) for e in entries]
    return tuple(sorted(out, key=lambda e: e.j))


def relabel_problem(pf: ProblemFile, c: int) -> ProblemFile:
    """Equivalent problem under the generator change sigma -> sigma^c.

    Character-indexed data moves j -> j*c; height-table coset exponents and
    transition coefficients pull back by c; when a primitive root is declared
    it is raised to the c-th power (c must stay a unit mod q-1 in that case).
    """
    order = pf.header.p ** pf.header.n
    if math.gcd(c, pf.header.p) != 1:
        raise ValueError("relabeling exponent must be prime to p")
    header = pf.header
    if header.q is not None and header.primitive_root is not None:
        if math.gcd(c, header.q - 1) != 1:
            raise ValueError(f"exponent {c} does not preserve primitive roots mod {header.q}")
        header = replace(header, primitive_root=pow(header.primitive_root, c, header.q))
    analytic = replace(
        pf.analytic,
        ratios=_reindex_entries(pf.analytic.ratios, order, c),
        leading_terms=_reindex_entries(pf.analytic.leading_terms, order, c),
        supplied_tau_star=_reindex_entries(pf.analytic.supplied_tau_star, order, c),
        vanishing_orders=(
            { (j * c) % order: v for j, v in pf.analytic.vanishing_orders.items() }
            if pf.analytic.vanishing_orders is not None
            else None
        ),
    )
    heights = []
    for e in pf.arithmetic.heights:
        block = pf.header.p ** e.row[0]
        heights.append(replace(e, tau=0 if block == 1 else _solve_reindex(e.tau, c, block)))
    transition = []
    for e in pf.arithmetic.transition:
        coeffs = list(e.coeffs)
        new = [coeffs[(c * i) % order] for i in range(order)]
        transition.append(replace(e, coeffs=tuple(new)))
    arithmetic = replace(pf.arithmetic, heights=tuple(heights), transition=tuple(transition))
    return ProblemFile(header, pf.curve, analytic, arithmetic)


def _solve_reindex(tau: int, c: int, block: int) -> int:
    # new exponent tau' with c * tau' = tau (mod block); block is a p-power
    cinv = pow(c % block, -1, block)
    return (tau * cinv) % block


def twist_problem(pf: ProblemFile, s: int) -> ProblemFile:
    """Simulate a different complex-p-adic identification by twisting the
    character labels of the analytic data: slot j*s receives slot j's data.

    Only meaningful for ratio-mode data (the twist acts on the recognized
    vector); raw leading terms and heights do not transform this way.
    """
    order = pf.header.p ** pf.header.n
    if math.gcd(s, pf.header.p) != 1:
        raise ValueError("twist exponent must be prime to p")
    if s % order != 1 and pf.analytic.mode != "ratios":
        raise ValueError("embedding twists only apply to ratio-mode data")
    analytic = replace(
        pf.analytic,
        ratios=_reindex_entries(pf.analytic.ratios, order, s),
        leading_terms=_reindex_entries(pf.analytic.leading_terms, order, s),
        supplied_tau_star=_reindex_entries(pf.analytic.supplied_tau_star, order, s),
        vanishing_orders=(
            { (j * s) % order: v for j, v in pf.analytic.vanishing_orders.items() }
            if pf.analytic.vanishing_orders is not None
            else None
        ),
    )
    return ProblemFile(pf.header, pf.curve, analytic, pf.arithmetic)


# ---------------------------------------------------------------------------
# Optional metadata fetcher.
# ---------------------------------------------------------------------------


def fetch_metadata(label: str, endpoint: str, timeout: float = 10.0) -> CurveBlock:
    """GET {endpoint}/curve/{label} and map the JSON reply to a curve block."""
    url = endpoint.rstrip("/") + "/curve/" + urllib.parse.quote(label)
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            payload = json.loads(resp.read().decode("utf-8"))
    except Exception as exc:  # noqa: BLE001 - network failures surface uniformly
        raise FetchError(f"metadata fetch from {url} failed: {exc}") from exc
    try:
        return CurveBlock(
            label=str(payload["label"]),
            dimension=int(payload.get("dimension", 1)),
            conductor=int(payload["conductor"]),
            torsion_order=int(payload["torsion_order"]),
            dual_torsion_order=int(payload.get("dual_torsion_order", payload["torsion_order"])),
            tamagawa={str(k): int(v) for k, v in payload.get("tamagawa", {}).items()},
            bad_reduction=tuple(int(v) for v in payload.get("bad_reduction", [])),
            residue_counts={str(k): int(v) for k, v in payload.get("residue_counts", {}).items()},
            rank=int(payload["rank"]) if "rank" in payload else None,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FetchError(f"metadata reply from {url} is malformed: {exc}") from exc
