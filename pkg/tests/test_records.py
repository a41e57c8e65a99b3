import textwrap

import pytest
import yaml

from zetabsd.fields import field_to_dict, lookup_field
from zetabsd.records import (ParseError, ValidationError, bundled_records, bundled_text, dump_records,
                             load_records, parse_records, record_to_dict)
from zetabsd.special_values import verify_equivalence

ELEVEN = textwrap.dedent("""\
    schema_version: "1"
    records:
      - id: 11a1
        field: Q
        jacobian:
          genus: 1
          ainvs: [0, -1, 1, -10, -20]
          places:
            - kind: real
              integrals: [["1.26920930427955342168879461675454730522"]]
          tamagawa_product: 5
          torsion: 5
          lstar: "0.25384186085591068433775892335090946104"
        fibers:
          - {type: I5, q: 11, tamagawa: 5}
    """)


def edited(text, old, new):
    assert old in text
    return text.replace(old, new)


def test_bundled_dataset_contents():
    recs = bundled_records()
    ids = {r.id for r in recs}
    assert len(recs) >= 6
    assert {"P1/Q", "P1/Q(i)", "11a1", "37a1", "conic-x2+xy+y2=2z2"} <= ids
    assert any(r.smooth_mode for r in recs)
    assert any(r.genus == 0 and r.global_index == 2 for r in recs)
    assert all(verify_equivalence(r).passed for r in recs)


def test_round_trip_is_exact():
    recs = bundled_records()
    text = dump_records(recs)
    again = list(parse_records(text).records)
    assert again == recs
    assert dump_records(again) == text


def test_round_trip_keeps_real_digits():
    rec = next(r for r in bundled_records() if r.id == "37a1")
    d = record_to_dict(rec)
    assert d["jacobian"]["lstar"] == "0.305999773834052301820483683321676474452637775"
    assert d["jacobian"]["places"][0]["integrals"][0][0].startswith("2.993458646231959629832009979452508")


def test_minimal_file_loads(tmp_path):
    p = tmp_path / "one.yaml"
    p.write_text(ELEVEN)
    (rec,) = load_records(p)
    assert rec.jacobian.torsion_dual == 5 and rec.fibers[0].c_v == 5
    assert verify_equivalence(rec).passed


def test_empty_files():
    assert parse_records("").records == ()
    assert parse_records('schema_version: "1"\nrecords: []\n').records == ()


def test_yaml_errors_carry_positions():
    with pytest.raises(ParseError, match=r"line 3, column \d+"):
        parse_records('schema_version: "1"\nrecords:\n  - id: a: b\n')
    with pytest.raises(ParseError):
        load_records("/nonexistent/records.yaml")


def test_inconsistent_tamagawa_number_is_named():
    with pytest.raises(ValidationError, match=r"records\[0\]\.fibers\[0\].*c_v = 1.*identity fails"):
        parse_records(edited(ELEVEN, "tamagawa: 5}", "tamagawa: 1}"))


@pytest.mark.parametrize("old,new,pattern", [
    ('schema_version: "1"', 'schema_version: "9"', "schema_version"),
    ("field: Q\n", "field: Q(sqrt7)\n", r"records\[0\]\.field"),
    ("type: I5", "type: I77", "unknown fiber type"),
    ("type: I5", "type: conic-conjugate-lines", "genus 0"),
    ('[["1.26920930427955342168879461675454730522"]]', "[[1.2692093042795534]]", "quoted decimal"),
    ('[["1.26920930427955342168879461675454730522"]]', '[["1.3"]]', "AGM"),
    ("- kind: real\n", "- kind: real\n          pi0_order: 2\n", "real components"),
    ("tamagawa_product: 5", "tamagawa_product: 3", "tamagawa_product"),
    ('      lstar: "0.25384186085591068433775892335090946104"\n', "", "lstar"),
    ("torsion: 5", "torsion: 0", "torsion"),
    ("- kind: real", "- kind: complex", "places"),
])
def test_validation_errors_name_the_field(old, new, pattern):
    with pytest.raises((ValidationError, ParseError), match=pattern):
        parse_records(edited(ELEVEN, old, new))


def test_duplicate_ids_are_rejected():
    doc = yaml.safe_load(ELEVEN)
    doc["records"].append(doc["records"][0])
    with pytest.raises(ValidationError, match="duplicate id"):
        parse_records(yaml.safe_dump(doc))


def test_inline_fields_and_raw_fibers():
    doc = {
        "schema_version": "1",
        "fields": [{**field_to_dict(lookup_field("Q")), "name": "rationals-copy", "aliases": []}],
        "records": [{
            "id": "blowup",
            "field": "rationals-copy",
            "jacobian": {"genus": 0},
            "fibers": [{"q": 5, "components": [{"d": 1}, {"d": 1}], "intersection": [[-1, 1], [1, -1]]}],
        }],
    }
    (rec,) = parse_records(yaml.safe_dump(doc)).records
    assert rec.field.name == "rationals-copy"
    assert rec.fibers[0].size == 2
    v = verify_equivalence(rec)
    assert v.passed and v.exact


def test_bundled_text_is_the_shipped_file():
    assert "schema_version" in bundled_text()
