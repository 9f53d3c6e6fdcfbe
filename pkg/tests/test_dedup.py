import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bri.dedup import PAIRS_HEADER, ScanConfig, prefilter_stats, scan, scan_with_stats, write_pairs
from bri.geometry import apply_motion, random_backbone, random_motion
from bri.ingest import ChainRecord


def rec(entry, coords, seq=None):
    return ChainRecord.from_backbone(entry, "A", coords, seq)


def test_rigid_copy(rng):
    s = random_backbone(30, rng)
    pairs = scan([rec("P1", s), rec("P2", apply_motion(random_motion(4), s))])
    assert len(pairs) == 1
    p = pairs[0]
    assert p.linf_bri <= 1e-9 and not p.coordinates_identical


def test_exact_copy(rng):
    s = random_backbone(30, rng)
    (p,) = scan([rec("P2", s), rec("P1", s.copy())])
    assert p.linf_bri == 0.0 and p.zero_distance
    assert p.coordinates_identical and p.sequences_equal
    assert (p.entry1, p.entry2) == ("P1", "P2")


def test_different_lengths_never_pair(rng):
    s = random_backbone(30, rng)
    assert scan([rec("P1", s), rec("P2", s[:29])]) == []


def test_renamed_residue(rng):
    s = random_backbone(12, rng)
    seq = ["ALA"] * 12
    other = list(seq)
    other[5] = "GLY"
    (p,) = scan([rec("P1", s, seq), rec("P2", s.copy(), other)])
    assert p.coordinates_identical and not p.sequences_equal


def test_threshold_boundary(rng):
    s = random_backbone(10, rng)
    b = s.copy()
    b[9, 2] += [0.004, 0, 0]
    d = scan([rec("P1", s), rec("P2", b)], ScanConfig(near_threshold=1.0))[0].linf_bri
    assert len(scan([rec("P1", s), rec("P2", b)], ScanConfig(near_threshold=d))) == 1
    assert scan([rec("P1", s), rec("P2", b)], ScanConfig(near_threshold=d * 0.999)) == []


def _corpus(seed, n=40):
    rng = np.random.default_rng(seed)
    chains = []
    for k in range(n):
        m = int(rng.integers(2, 6))
        chains.append(rec(f"C{k:03d}", random_backbone(m, rng, bond_range=(1.45, 1.5), angle_range=(110, 112))))
    # A few near copies so the threshold matters.
    for k in range(5):
        base = chains[k].backbone
        chains.append(rec(f"N{k:03d}", base + rng.uniform(-0.002, 0.002, base.shape)))
    return chains


@given(st.integers(0, 2**32 - 1))
def test_prefilter_never_loses_pairs(seed):
    corpus = _corpus(seed)
    for thr in (0.01, 0.5):
        on = scan(corpus, ScanConfig(thr, prefilter=True), threads=1)
        off = scan(corpus, ScanConfig(thr, prefilter=False), threads=1)
        assert on == off


def test_prefilter_off_prunes_nothing():
    counts = prefilter_stats(_corpus(1), ScanConfig(prefilter=False))
    assert counts.pruned == 0 and counts.compared == counts.considered


def test_thread_count_does_not_change_output():
    corpus = _corpus(7, 80)
    a = scan_with_stats(corpus, threads=1)
    b = scan_with_stats(corpus, threads=4)
    assert a[0] == b[0] and a[1].tsv() == b[1].tsv()


def test_write_pairs_format(rng):
    s = random_backbone(5, rng)
    buf = io.StringIO()
    write_pairs(scan([rec("P1", s), rec("P2", s.copy())]), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == PAIRS_HEADER
    assert lines[1].split("\t") == ["P1", "A", "P2", "A", "5", "0", "true", "true"]


def test_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(near_threshold=-1)
