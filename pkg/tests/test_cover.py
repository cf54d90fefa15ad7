from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from ksat_lab.cover import (ONE, SCOPE_ALL, STAR, ZERO, CoverMap, count_balanced, count_nae, count_sat,
                            cover_from_shade, cover_map, critical_clauses, enumerate_covers, enumerate_shades,
                            is_cover, is_satisfying_cover, is_valid_shade, make_shade, overlap, shade_from_cover)
from ksat_lab.errors import CapExceeded, ValidationError
from ksat_lab.formula import gen_uniform, make_formula

SINGLE = make_formula(3, [(1, 2, 3)])


def _direct_cover(f, z) -> bool:
    """CV1 / CV2 straight from the definition, occurring-literal scope."""
    def val(l):
        v = z.values[abs(l) - 1]
        if l > 0 or v == STAR:
            return v
        return ONE if v == ZERO else ZERO

    for c in f.clauses:
        vals = [val(l) for l in c]
        if ONE not in vals and vals.count(STAR) < 2:
            return False
    occurring = {l for c in f.clauses for l in c}
    for x in range(1, f.n_vars + 1):
        if z.values[x - 1] == STAR:
            continue
        if x not in {abs(l) for l in occurring}:
            return False
        lit = x if z.values[x - 1] == ONE else -x
        if lit not in occurring:
            continue
        if not any(lit in c and [val(l) for l in c].count(ONE) == 1
                   and [val(l) for l in c].count(ZERO) == len(c) - 1 for c in f.clauses):
            return False
    return True


def test_cover_map_parse_and_render() -> None:
    z = cover_map("1*0")
    assert z.values == (ONE, STAR, ZERO)
    assert str(z) == "1*0"
    assert z.lit(-1) == ZERO and z.lit(-2) == STAR and z.lit(-3) == ONE
    with pytest.raises(ValidationError):
        cover_map("12")


def test_single_clause_has_seven_covers() -> None:
    covers = enumerate_covers(SINGLE)
    assert len(covers) == 7
    assert sorted(str(z) for z in covers) == sorted(["***", "0**", "*0*", "**0", "100", "010", "001"])


def test_scope_all_only_keeps_all_star() -> None:
    assert [str(z) for z in enumerate_covers(SINGLE, SCOPE_ALL)] == ["***"]


def test_scopes_on_the_two_clause_formula() -> None:
    f = make_formula(3, [(1, 2, 3), (-1, 2, 3)])
    assert [str(z) for z in enumerate_covers(f, SCOPE_ALL)] == ["***"]
    # literals outside the formula are free under the default scope
    assert sorted(str(z) for z in enumerate_covers(f)) == ["***", "**0", "*0*"]


def test_unused_variable_is_pinned_to_star() -> None:
    f = make_formula(4, [(1, 2, 3)])
    covers = enumerate_covers(f)
    assert len(covers) == 7
    assert all(z.values[3] == STAR for z in covers)
    v = is_cover(f, cover_map("1000"))
    assert not v.ok and any("occurs nowhere" in msg for msg in v.violations)


def test_is_cover_reports_violations() -> None:
    v = is_cover(SINGLE, cover_map("11*"))
    assert not v
    assert any("CV2" in msg for msg in v.violations)
    v = is_cover(SINGLE, cover_map("0*0"))
    assert any("CV1" in msg for msg in v.violations)
    with pytest.raises(ValidationError):
        is_cover(SINGLE, cover_map("1*"))


def test_critical_clauses() -> None:
    f = make_formula(3, [(1, 2, 3), (-1, 2, 3), (3, 2, 1)])
    assert critical_clauses(f, cover_map("100")) == {0, 2}
    assert critical_clauses(f, cover_map("010")) == {0, 2}
    assert critical_clauses(f, cover_map("**0")) == set()


def test_is_cover_matches_definition_on_random_instances() -> None:
    for seed in range(40):
        n = 3 + seed % 2
        f = gen_uniform(3, n, 1 + seed % 5, seed)
        for vals in itertools.product((ZERO, ONE, STAR), repeat=n):
            z = CoverMap(vals)
            assert is_cover(f, z).ok == _direct_cover(f, z), (seed, str(z))


def test_shade_roundtrip_on_single_clause() -> None:
    s = shade_from_cover(SINGLE, cover_map("100"))
    assert s.to_dict() == {"1:1": "r", "2:1": "y", "3:1": "y"}
    assert cover_from_shade(SINGLE, s) == cover_map("100")
    s = shade_from_cover(SINGLE, cover_map("**0"))
    assert s.to_dict() == {"1:1": "g", "2:1": "g", "3:1": "y"}


def test_invalid_shade_is_rejected() -> None:
    s = make_shade(3, {(1, 1): "r", (2, 1): "g", (3, 1): "y"})
    v = is_valid_shade(SINGLE, s)
    assert not v.ok and any("V1" in msg for msg in v.violations)
    with pytest.raises(ValidationError):
        cover_from_shade(SINGLE, s)


def test_shades_biject_with_covers() -> None:
    for seed in range(25):
        f = gen_uniform(3, 4, 2 + seed % 4, 100 + seed)
        covers = enumerate_covers(f)
        shades = enumerate_shades(f)
        assert len(covers) == len(shades)
        assert sorted(str(cover_from_shade(f, s)) for s in shades) == sorted(str(z) for z in covers)
        for z in covers:
            assert cover_from_shade(f, shade_from_cover(f, z)) == z


def test_enumeration_cap() -> None:
    f = make_formula(5, [(1, 2, 3), (3, 4, 5)])
    with pytest.raises(CapExceeded):
        enumerate_covers(f, cap=4)


def test_overlap_matrix() -> None:
    a, b = cover_map("1*0"), cover_map("10*")
    o = overlap(a, b)
    assert sum(sum(row) for row in o.entries) == 1
    assert o.entries[ONE][ONE] == Fraction(1, 6)
    assert o.entries[STAR][ZERO] == Fraction(1, 6)
    assert o.delta == Fraction(2, 3)
    assert overlap(b, a) == o.transpose()
    assert overlap(a, a).delta == 0


def test_brute_force_counts() -> None:
    assert count_sat(SINGLE) == 7
    assert count_nae(SINGLE) == 6
    assert count_balanced(SINGLE, 0) == 0
    assert count_balanced(SINGLE, Fraction(1, 6)) == 6


def test_satisfying_assignments_as_covers() -> None:
    assert is_satisfying_cover(SINGLE, {1: 1, 2: 0, 3: 0}).ok
    v = is_satisfying_cover(SINGLE, [1, 1, 0])
    assert not v.ok and all("CV2" in msg for msg in v.violations)
    with pytest.raises(ValidationError):
        is_satisfying_cover(SINGLE, [0, 0, 0])
