"""Record files: schema, loading with validation, serialization, bundled dataset.

A record file is one YAML document:

    schema_version: "1"
    fields: [...]        # optional inline field definitions
    records: [...]

Exact rationals are written as integers or "p/q" strings, reals as decimal
strings, complex period entries as [re, im] pairs of decimal strings.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import mpmath
import yaml

from .fibers import Component, FiberData, MalformedFiber, fiber_catalog, fls_check, lookup_fiber
from .fields import FieldError, check_embedding_data, field_from_dict, field_to_dict, lookup_field
from .numeric import as_fraction, precise, to_real, working_precision
from .periods import (AbelianVarietyData, DegeneratePeriods, EtaData, IncompleteRecord, PlacePeriodData,
                      elliptic_real_period, place_period)
from .special_values import InconsistentRecord, SurfaceRecord, brauer_order, tamagawa_from_fibers

SCHEMA_VERSIONS = ("1",)


class ParseError(ValueError):
    pass


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class RecordFile:
    schema_version: str
    records: tuple[SurfaceRecord, ...]
    source: str = ""


def _frac(x, where: str) -> Fraction:
    try:
        return as_fraction(x)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ValidationError(f"{where}: expected an exact rational, got {x!r}") from None


def _real_str(x, where: str) -> str:
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise ValidationError(f"{where}: expected a decimal string, got {x!r}")
    if isinstance(x, float):
        raise ValidationError(f"{where}: write reals as quoted decimal strings to keep their digits")
    s = str(x).strip()
    try:
        to_real(s)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"{where}: {s!r} is not a number") from None
    return s


def _entry(x, where: str):
    if isinstance(x, list):
        if len(x) != 2:
            raise ValidationError(f"{where}: complex entries are [re, im]")
        return (_real_str(x[0], where), _real_str(x[1], where))
    return _real_str(x, where)


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ValidationError(f"{where}: missing field {key!r}")
    return d[key]


def _place(d: dict, where: str) -> PlacePeriodData:
    rows = _require(d, "integrals", where)
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ValidationError(f"{where}.integrals: expected a list of rows")
    ints = tuple(tuple(_entry(x, f"{where}.integrals[{i}][{j}]") for j, x in enumerate(r))
                 for i, r in enumerate(rows))
    try:
        return PlacePeriodData(str(_require(d, "kind", where)), ints, int(d.get("pi0_order", 1)))
    except DegeneratePeriods as e:
        raise ValidationError(f"{where}: {e}") from None


def _jacobian(d: dict, where: str) -> AbelianVarietyData:
    genus = int(_require(d, "genus", where))
    eta_d = d.get("eta", {}) or {}
    gen = eta_d.get("generator")
    eta = EtaData(_frac(eta_d.get("ideal_norm", 1), f"{where}.eta.ideal_norm"), str(eta_d.get("label", "")),
                  None if gen is None else tuple(int(c) for c in gen))
    places = tuple(_place(p, f"{where}.places[{i}]") for i, p in enumerate(d.get("places", []) or []))
    lstar = d.get("lstar", "1" if genus == 0 else None)
    try:
        return AbelianVarietyData(
            genus=genus,
            places=places,
            eta=eta,
            tamagawa_product=_frac(d.get("tamagawa_product", 1), f"{where}.tamagawa_product"),
            torsion=_frac(d.get("torsion", 1), f"{where}.torsion"),
            torsion_dual=_frac(d.get("torsion_dual", d.get("torsion", 1)), f"{where}.torsion_dual"),
            theta_nt=_real_str(d.get("theta_nt", "1"), f"{where}.theta_nt"),
            sha_order=_frac(d.get("sha", 1), f"{where}.sha"),
            lstar=None if lstar is None else _real_str(lstar, f"{where}.lstar"),
            rank=int(d.get("rank", 0)),
            ainvs=None if d.get("ainvs") is None else tuple(int(a) for a in d["ainvs"]),
        )
    except (IncompleteRecord, DegeneratePeriods) as e:
        raise ValidationError(f"{where}: {e}") from None


def _fiber(d: dict, where: str, genus: int) -> FiberData:
    q = int(_require(d, "q", where))
    tam = None if d.get("tamagawa") is None else _frac(d["tamagawa"], f"{where}.tamagawa")
    place = str(d.get("place", ""))
    try:
        if "type" in d:
            t = lookup_fiber(str(d["type"]))
            if t.genus != genus:
                raise ValidationError(f"{where}: fiber type {t.name} is for genus {t.genus}, record has genus {genus}")
            idx = None if d.get("index") is None else _frac(d["index"], f"{where}.index")
            per = None if d.get("period") is None else _frac(d["period"], f"{where}.period")
            return t.at(q, tam, idx, per, place)
        comps = tuple(Component(int(c["d"]), int(c.get("r", 1)), int(c.get("e", 1)))
                      for c in _require(d, "components", where))
        return FiberData(q, comps, tuple(tuple(int(x) for x in r) for r in _require(d, "intersection", where)),
                         _frac(d.get("index", 1), f"{where}.index"), _frac(d.get("period", 1), f"{where}.period"),
                         tam, int(d.get("genus", genus)), str(d.get("name", "custom")), place)
    except MalformedFiber as e:
        raise ValidationError(f"{where}: {e}") from None


@precise
def validate_record(rec: SurfaceRecord, where: str) -> None:
    """Cross-field checks beyond the constructors' own."""
    problems = check_embedding_data(rec.field)
    if problems:
        raise ValidationError(f"{where}.field: " + "; ".join(problems))
    for i, fb in enumerate(rec.fibers):
        chk = fls_check(fb)
        if not chk.ok:
            raise ValidationError(f"{where}.fibers[{i}]: {chk.message}")
    a = rec.jacobian
    if a.genus:
        kinds = [k for k, _ in rec.field.place_slices()]
        if [p.kind for p in a.places] != kinds:
            raise ValidationError(f"{where}.jacobian.places: expected places {kinds}")
        p_fin = tamagawa_from_fibers(rec)
        if a.tamagawa_product != p_fin:
            raise ValidationError(f"{where}.jacobian.tamagawa_product: {a.tamagawa_product} but the fibers "
                                  f"give {p_fin}")
        if a.lstar is None:
            raise ValidationError(f"{where}.jacobian.lstar: missing L*(J,1)")
        if a.ainvs is not None and rec.field.d_F == 1 and a.genus == 1:
            omega, comps = elliptic_real_period(a.ainvs)
            stated = place_period(a.places[0])
            if a.places[0].pi0_order != comps:
                raise ValidationError(f"{where}.jacobian.places[0].pi0_order: curve has {comps} real components")
            if abs(stated / (comps * omega) - 1) > to_real(rec.tolerance):
                raise ValidationError(f"{where}.jacobian.places[0]: stated period disagrees with the AGM "
                                      f"value {mpmath.nstr(omega, 20)}")
    try:
        brauer_order(rec)
    except InconsistentRecord as e:
        raise ValidationError(f"{where}: {e}") from None


def _record(d: dict, where: str, inline_fields: dict) -> SurfaceRecord:
    if not isinstance(d, dict):
        raise ValidationError(f"{where}: expected a mapping")
    fd = _require(d, "field", where)
    try:
        if isinstance(fd, dict):
            fld = field_from_dict(fd)
        elif str(fd) in inline_fields:
            fld = inline_fields[str(fd)]
        else:
            fld = lookup_field(str(fd))
    except FieldError as e:
        raise ValidationError(f"{where}.field: {e}") from None
    jac = _jacobian(_require(d, "jacobian", where), f"{where}.jacobian")
    fibers = tuple(_fiber(f, f"{where}.fibers[{i}]", jac.genus) for i, f in enumerate(d.get("fibers", []) or []))
    br = d.get("brauer_order")
    try:
        rec = SurfaceRecord(
            id=str(_require(d, "id", where)),
            field=fld,
            jacobian=jac,
            fibers=fibers,
            global_index=_frac(d.get("global_index", 1), f"{where}.global_index"),
            pic0_cokernel=_frac(d.get("pic0_cokernel", 1), f"{where}.pic0_cokernel"),
            brauer_order=None if br is None else _frac(br, f"{where}.brauer_order"),
            smooth_mode=bool(d.get("smooth_mode", False)),
            tolerance=_real_str(d.get("tolerance", "1e-6"), f"{where}.tolerance"),
            precision=None if d.get("precision") is None else int(d["precision"]),
            description=str(d.get("description", "")),
            provenance=str(d.get("provenance", "")),
        )
    except InconsistentRecord as e:
        raise ValidationError(f"{where}: {e}") from None
    with working_precision(rec.precision):
        validate_record(rec, where)
    return rec


def parse_records(text: str, source: str = "<string>") -> RecordFile:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        pos = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ParseError(f"{source}: YAML error{pos}: {getattr(e, 'problem', e)}") from None
    if doc is None:
        doc = {"schema_version": SCHEMA_VERSIONS[-1], "records": []}
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be a mapping")
    version = str(doc.get("schema_version", ""))
    if version not in SCHEMA_VERSIONS:
        raise ValidationError(f"{source}: unrecognized schema_version {version!r}")
    inline = {}
    for i, fd in enumerate(doc.get("fields", []) or []):
        try:
            f = field_from_dict(fd)
        except (FieldError, TypeError, ValueError) as e:
            raise ValidationError(f"{source}: fields[{i}]: {e}") from None
        inline[f.name] = f
    raw = doc.get("records", []) or []
    if not isinstance(raw, list):
        raise ValidationError(f"{source}: records must be a list")
    records = []
    seen = set()
    for i, d in enumerate(raw):
        rec = _record(d, f"records[{i}]", inline)
        if rec.id in seen:
            raise ValidationError(f"records[{i}]: duplicate id {rec.id!r}")
        seen.add(rec.id)
        records.append(rec)
    return RecordFile(version, tuple(records), source)


def load_records(path) -> list[SurfaceRecord]:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"{path}: {e.strerror}") from None
    return list(parse_records(text, str(path)).records)


BUNDLED = "data/records.yaml"


def bundled_text() -> str:
    return resources.files("zetabsd").joinpath(BUNDLED).read_text(encoding="utf-8")


def bundled_records() -> list[SurfaceRecord]:
    return list(parse_records(bundled_text(), "bundled dataset").records)


# -- serialization ----------------------------------------------------------------

def _fs(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _fiber_dict(f: FiberData) -> dict:
    out = {"q": f.q}
    if f.place:
        out["place"] = f.place
    cat = fiber_catalog().get(f.kind)
    if cat is not None and cat.components == f.components and cat.intersection == f.intersection \
            and cat.genus == f.genus:
        out["type"] = f.kind
        if f.index_local != cat.index:
            out["index"] = _fs(f.index_local)
        if f.period_local != cat.period:
            out["period"] = _fs(f.period_local)
    else:
        out["name"] = f.kind or "custom"
        out["genus"] = f.genus
        out["components"] = [{"d": c.d, "r": c.r, "e": c.e} for c in f.components]
        out["intersection"] = [list(r) for r in f.intersection]
        out["index"] = _fs(f.index_local)
        out["period"] = _fs(f.period_local)
    if f.tamagawa is not None:
        out["tamagawa"] = _fs(f.tamagawa)
    return out


def _entry_out(x):
    if isinstance(x, tuple):
        return [str(x[0]), str(x[1])]
    return str(x)


def record_to_dict(rec: SurfaceRecord, field_by_name: bool = True) -> dict:
    a = rec.jacobian
    try:
        catalogued = lookup_field(rec.field.name) == rec.field
    except FieldError:
        catalogued = False
    jac = {"genus": a.genus, "rank": a.rank}
    if a.ainvs is not None:
        jac["ainvs"] = list(a.ainvs)
    eta = {"ideal_norm": _fs(a.eta.ideal_norm), "label": a.eta.label}
    if a.eta.generator is not None:
        eta["generator"] = list(a.eta.generator)
    jac["eta"] = eta
    jac["places"] = [{"kind": p.kind, "pi0_order": p.pi0_order,
                      "integrals": [[_entry_out(x) for x in r] for r in p.integrals]} for p in a.places]
    jac.update({"tamagawa_product": _fs(a.tamagawa_product), "torsion": _fs(a.torsion),
                "torsion_dual": _fs(a.torsion_dual), "theta_nt": a.theta_nt, "sha": _fs(a.sha_order)})
    if a.lstar is not None:
        jac["lstar"] = a.lstar
    out = {"id": rec.id}
    if rec.description:
        out["description"] = rec.description
    if rec.provenance:
        out["provenance"] = rec.provenance
    out["field"] = rec.field.name if (catalogued and field_by_name) else field_to_dict(rec.field)
    out["smooth_mode"] = rec.smooth_mode
    out["global_index"] = _fs(rec.global_index)
    out["pic0_cokernel"] = _fs(rec.pic0_cokernel)
    if rec.brauer_order is not None:
        out["brauer_order"] = _fs(rec.brauer_order)
    out["tolerance"] = rec.tolerance
    if rec.precision is not None:
        out["precision"] = rec.precision
    out["jacobian"] = jac
    out["fibers"] = [_fiber_dict(f) for f in rec.fibers]
    return out


def dump_records(records, version: str = SCHEMA_VERSIONS[-1]) -> str:
    doc = {"schema_version": version, "records": [record_to_dict(r) for r in records]}
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True, width=120)
