import pytest

from hklab.filtrations import (
    FiltrationError,
    WeightFiltration,
    compare_gr_dims,
    conjugate_hodge_check,
    crosscheck_perverse_weight,
    graded_jordan_chains,
    graded_nilpotence_index,
    graded_weight_filtration,
    jordan_chains,
    monodromy_weight_table,
    perverse_filtration,
    perverse_hodge_table,
    verify_graded_weight_filtration,
    verify_weight_filtration,
    weight_filtration,
)
from hklab.linalg import QQ, Mat, Subspace
from hklab.llv import lefschetz
from hklab.quadforms import sample_isotropic


def nilpotent_blocks(*sizes):
    """Block-diagonal nilpotent matrix with the given Jordan block sizes."""
    dim = sum(sizes)
    m = Mat.zeros(dim, dim)
    pos = 0
    for s in sizes:
        for i in range(s - 1):
            m.data[pos + i + 1][pos + i] = QQ(1)
        pos += s
    return m


def test_weight_filtration_zero_map():
    wf = weight_filtration(Mat.zeros(3, 3), 2)
    assert wf.graded_dims() == {2: 3}
    assert verify_weight_filtration(Mat.zeros(3, 3), wf)


def test_weight_filtration_single_block():
    j3 = nilpotent_blocks(3)
    wf = weight_filtration(j3, 2)
    assert wf.graded_dims() == {0: 1, 2: 1, 4: 1}
    assert verify_weight_filtration(j3, wf)


def test_weight_filtration_centre_too_small():
    j3 = nilpotent_blocks(3)
    with pytest.raises(FiltrationError):
        weight_filtration(j3, 1)


def test_jordan_chains_shapes():
    m = nilpotent_blocks(3, 2)
    lengths = sorted(len(c) for c in jordan_chains(m))
    assert lengths == [2, 3]
    m2 = nilpotent_blocks(2, 2, 1)
    assert sorted(len(c) for c in jordan_chains(m2)) == [1, 2, 2]


def test_weight_filtration_uniqueness_against_hand_built():
    """Two Jordan blocks of sizes 3 and 2 on coordinates e0..e4, centred
    at 2: the ladder weights are (4, 2, 0) and (3, 1), so the chain is
    frozen by hand and must agree with the construction step by step."""
    m = nilpotent_blocks(3, 2)
    hand = [
        Subspace.from_vectors(5, [[0, 0, 1, 0, 0]]),                 # W0
        Subspace.from_vectors(5, [[0, 0, 1, 0, 0], [0, 0, 0, 0, 1]]),  # W1
        Subspace.from_vectors(5, [[0, 0, 1, 0, 0], [0, 0, 0, 0, 1],
                                  [0, 1, 0, 0, 0]]),                 # W2
        Subspace.from_vectors(5, [[0, 0, 1, 0, 0], [0, 0, 0, 0, 1],
                                  [0, 1, 0, 0, 0], [0, 0, 0, 1, 0]]),  # W3
        Subspace.full(5),                                            # W4
    ]
    wf = weight_filtration(m, 2)
    for i in range(5):
        assert wf.step(i) == hand[i]
    assert verify_weight_filtration(m, WeightFiltration(2, tuple(hand)))
    shifted = WeightFiltration(2, tuple(hand[1:] + [hand[-1]]))
    assert not verify_weight_filtration(m, shifted)


def test_graded_weight_filtration_matches_dense(calculus):
    alg, frame, fc, big = calculus(1, 5)
    lop = lefschetz(alg, frame.beta)
    assert graded_nilpotence_index(lop) == alg.n
    wf = graded_weight_filtration(lop, alg.n)
    assert verify_graded_weight_filtration(lop, wf)
    chains = graded_jordan_chains(lop)
    assert sum(length for _, length, _ in chains) == sum(alg.dims().values())


def test_monodromy_degree2_graded_dims(calculus):
    """The degree-2 weight chain of the model operator splits as
    (2, b2-4, 2) across indices n-1, n, n+1."""
    for b2 in (4, 5):
        alg, frame, fc, big = calculus(1, b2)
        n = alg.n
        wf = weight_filtration(fc.M.block(2), n)
        expected = {n - 1: 2, n + 1: 2}
        if b2 > 4:
            expected[n] = b2 - 4
        assert wf.graded_dims() == expected
    alg, frame, fc, big = calculus(2, 5)
    wf = weight_filtration(fc.M.block(2), 2)
    assert wf.graded_dims() == {1: 2, 2: 1, 3: 2}


def test_perverse_exhaustion_and_degree0(calculus):
    alg, frame, fc, big = calculus(2, 4)
    chain = perverse_filtration(alg, frame.beta, 0)
    assert chain[0].dim == 1
    assert chain[-1].dim == 0
    top = perverse_filtration(alg, frame.beta, 4)
    assert top[max(top)].dim == alg.dims()[4]


def test_perverse_degree2_row_dims(calculus):
    for (n, b2) in [(1, 4), (1, 5), (2, 5)]:
        alg, frame, fc, big = calculus(n, b2)
        chain = perverse_filtration(alg, frame.beta, 2)
        gr = {i: chain[i].dim - chain[i - 1].dim
              for i in range(0, 2 * n + 1) if i - 1 in chain}
        gr = {i: v for i, v in gr.items() if v}
        assert gr == {0: 1, 1: b2 - 2, 2: 1}


def test_perverse_needs_isotropic(calculus):
    alg, frame, fc, big = calculus(1, 4)
    with pytest.raises(FiltrationError):
        perverse_filtration(alg, [1, 1, 0, 0], 2)


def test_crosscheck_perverse_weight(calculus):
    for key in [(1, 4), (1, 5), (2, 4), (2, 5)]:
        alg, frame, fc, big = calculus(*key)
        assert crosscheck_perverse_weight(alg, frame.beta)


def test_crosscheck_with_random_isotropic(calculus):
    alg, frame, fc, big = calculus(2, 4)
    for v in sample_isotropic(alg.space, 2, seed=314):
        assert crosscheck_perverse_weight(alg, v)


def test_conjugate_hodge(calculus):
    for key in [(1, 5), (2, 4), (2, 5)]:
        alg, frame, fc, big = calculus(*key)
        assert conjugate_hodge_check(alg, big, frame.sbar)


def test_compare_gr_dims(calculus):
    for key in [(1, 4), (1, 5), (2, 4), (2, 5)]:
        alg, frame, fc, big = calculus(*key)
        left, right, ok = compare_gr_dims(alg, fc.M, big)
        assert ok
        # degree-2 row: the diagonal boxes are 2 / (b2 - 4) / 2
        b2 = alg.b2
        row = {j: v for (d, j), v in left.entries.items() if d == 2 and v}
        expected = {-1: 2, 1: 2}
        if b2 > 4:
            expected[0] = b2 - 4
        assert row == expected


def test_dim_table_rendering(calculus):
    alg, frame, fc, big = calculus(1, 4)
    table = monodromy_weight_table(alg, fc.M)
    text = table.render_text()
    assert "deg" in text and "0" in text
    js = table.to_json()
    assert js["entries"]
    right = perverse_hodge_table(big)
    assert sum(v for _, v in right.entries.items()) == sum(alg.dims().values())
