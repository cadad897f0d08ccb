import json
import math

import pytest

from cscp.errors import ConfigError, GenerationError, ValidationError
from cscp.mining import find_support
from cscp.model import ItemSet, Sex
from cscp.synth import (
    DEFAULT_CATALOG,
    Boost,
    GeneratorConfig,
    from_profile,
    generate,
    id_format,
    load_config,
)


@pytest.mark.parametrize("n, pid", [(1, "P000000001"), (1000, "P000001000"), (999_999_999, "P999999999")])
def test_id_format(n, pid):
    assert id_format(n) == pid


@pytest.mark.parametrize("n", [0, -1, 1_000_000_000])
def test_id_format_range(n):
    with pytest.raises(ValidationError):
        id_format(n)


def test_default_dataset_shape():
    table, demo = generate(GeneratorConfig())
    assert table.total_patients == 1000
    assert table.patients()[0] == "P000000001" and table.patients()[-1] == "P000001000"
    assert set(table.universe()) == {"Heart-Block", "Hypertension", "Myocarditis", "Cardiac-Arrest", "Bradycardia"}
    assert all(table.entries.values())
    assert set(demo) == set(table.entries)
    assert all(18 <= d.age <= 90 and d.sex in (Sex.FEMALE, Sex.MALE) for d in demo.values())


def test_default_catalog_prevalences():
    assert dict(DEFAULT_CATALOG) == {
        "Heart-Block": 0.334, "Hypertension": 0.549, "Myocarditis": 0.532,
        "Cardiac-Arrest": 0.536, "Bradycardia": 0.305,
    }


def test_certain_disease():
    table, _ = generate(GeneratorConfig(patient_count=200, catalog=(("D", 1.0), ("E", 0.3))))
    assert all("D" in ds for ds in table.entries.values())


def test_same_seed_same_output():
    cfg = GeneratorConfig(patient_count=300, seed=42)
    assert generate(cfg) == generate(cfg)
    assert generate(cfg)[0] != generate(cfg.with_seed(43))[0]


def test_frozen_first_patients():
    # Pins the MT19937 stream usage; a change here breaks reproducibility of old seeds.
    table, demo = generate(GeneratorConfig(patient_count=3, seed=2024))
    snapshot = [(p, sorted(table.entries[p]), demo[p].age, demo[p].sex.value) for p in table.patients()]
    assert snapshot == FROZEN_2024


FROZEN_2024 = [
    ("P000000001", ["Myocarditis"], 70, "female"),
    ("P000000002", ["Cardiac-Arrest", "Heart-Block", "Myocarditis"], 88, "female"),
    ("P000000003", ["Bradycardia", "Hypertension"], 72, "female"),
]


def test_all_zero_prevalence_fails():
    with pytest.raises(GenerationError):
        generate(GeneratorConfig(patient_count=1, catalog=(("A", 0.0),)))


def test_marginals_within_five_sigma():
    # Disease "Always" makes every draw non-empty, so the other marginals are unconditioned.
    catalog = (("Always", 1.0), ("A", 0.2), ("B", 0.5), ("C", 0.05))
    n = 5000
    table, _ = generate(GeneratorConfig(patient_count=n, catalog=catalog, seed=7))
    counts = find_support(table, [ItemSet.of(name) for name, _ in catalog])
    for (name, p), ic in zip(catalog, counts):
        assert abs(ic.support_count - n * p) <= 5 * math.sqrt(n * p * (1 - p)) + 1e-9, name


def test_boost_raises_confidence():
    base = (("A", 0.3), ("B", 0.2), ("C", 0.5))
    n = 10_000

    def conf(multiplier):
        cfg = GeneratorConfig(patient_count=n, catalog=base, boosts=(Boost("A", "B", multiplier),), seed=99)
        table, _ = generate(cfg)
        a, ab = find_support(table, [ItemSet.of("A"), ItemSet.of("A", "B")])
        return ab.support_count / a.support_count

    assert conf(3.0) > conf(1.0) + 0.2


def test_boost_clamped():
    cfg = GeneratorConfig(patient_count=500, catalog=(("A", 0.5), ("B", 0.5)), boosts=(Boost("A", "B", 10.0),))
    table, _ = generate(cfg)
    assert all("B" in ds for ds in table.entries.values() if "A" in ds)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(patient_count=0),
        dict(catalog=()),
        dict(catalog=(("A", 1.5),)),
        dict(catalog=(("A", 0.5), ("A", 0.2))),
        dict(boosts=(Boost("Hypertension", "Heart-Block", 2.0),)),  # target precedes given
        dict(boosts=(Boost("Heart-Block", "Nope", 2.0),)),
        dict(boosts=(Boost("Heart-Block", "Hypertension", -1.0),)),
        dict(age_range=(50, 40)),
        dict(sex_distribution=(0.5, 0.6, 0.0)),
        dict(seed=-1),
        dict(seed=2**64),
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        GeneratorConfig(**kwargs)


def test_config_json_round_trip(tmp_path):
    cfg = GeneratorConfig(
        patient_count=12, catalog=(("A", 0.4), ("B", 0.6)), boosts=(Boost("A", "B", 1.5),),
        age_range=(20, 30), sex_distribution=(0.2, 0.3, 0.5), seed=5,
    )
    path = tmp_path / "gen.json"
    path.write_text(json.dumps(cfg.as_dict()))
    assert load_config(path) == cfg
    path.write_text("{}")
    assert load_config(path) == GeneratorConfig()
    path.write_text('{"bogus": 1}')
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)


def test_from_profile_exact_counts():
    table = from_profile([({"Bradycardia", "Cardiac-Arrest"}, 26), ({"Bradycardia"}, 279), ({"Hypertension"}, 695)])
    assert table.total_patients == 1000
    counts = find_support(table, [ItemSet.of("Bradycardia"), ItemSet.of("Bradycardia", "Cardiac-Arrest")])
    assert [c.support_count for c in counts] == [305, 26]
