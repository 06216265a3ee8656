import random

import numpy as np
import pytest

from conftest import random_io_corpus
from fewner.corpus import TagLabel, TagScheme, TaggedSentence
from fewner.transitions import (
    AbstractTransitions,
    ExpandedTransitions,
    apply_temperature,
    count_abstract,
    estimate_abstract,
    expand,
    load_transitions,
    save_transitions,
    uniform_transitions,
)


def io_sentence(*tag_strs: str) -> TaggedSentence:
    tags = tuple(TagLabel.from_string(t) for t in tag_strs)
    return TaggedSentence(tuple(f"t{i}" for i in range(len(tags))), tags, TagScheme.IO)


def random_abstract(rng: np.random.Generator) -> AbstractTransitions:
    def row(keys):
        p = rng.dirichlet(np.ones(len(keys)))
        return dict(zip(keys, p.tolist()))

    return AbstractTransitions(
        from_start=row(("O", "I")),
        from_o=row(("O", "I", "END")),
        from_i=row(("O", "I", "I-Other", "END")),
    )


class TestCountAbstract:
    def test_hand_walk(self):
        counts = count_abstract([io_sentence("O", "I-PER", "I-PER", "O")])
        assert dict(counts.counts) == {
            ("START", "O"): 1,
            ("O", "I"): 1,
            ("I", "I"): 1,
            ("I", "O"): 1,
            ("O", "END"): 1,
        }

    def test_cross_class_is_i_other(self):
        counts = count_abstract([io_sentence("I-PER", "I-LOC")])
        assert counts.counts[("I", "I-Other")] == 1
        assert counts.counts[("START", "I")] == 1
        assert counts.counts[("I", "END")] == 1

    def test_all_outside(self):
        counts = count_abstract([io_sentence("O", "O", "O")])
        assert set(counts.counts) == {("START", "O"), ("O", "O"), ("O", "END")}

    def test_bio_rejected(self):
        bio = TaggedSentence(("a",), (TagLabel.begin("PER"),), TagScheme.BIO)
        with pytest.raises(ValueError, match="to_io"):
            count_abstract([bio])

    def test_total_is_tokens_plus_one_per_sentence(self):
        rng = random.Random(19)
        for _ in range(50):
            corpus = random_io_corpus(rng, rng.randint(1, 12))
            counts = count_abstract(corpus)
            assert counts.total() == sum(len(s) + 1 for s in corpus)


class TestEstimateAbstract:
    def test_hand_normalization(self):
        counts = count_abstract([io_sentence("O", "I-PER", "I-PER", "O")])
        ab = estimate_abstract(counts)
        assert ab.from_start == {"O": 1.0, "I": 0.0}
        assert ab.from_o == {"O": 0.0, "I": 0.5, "END": 0.5}
        assert ab.from_i == {"O": 0.5, "I": 0.5, "I-Other": 0.0, "END": 0.0}

    def test_degenerate_sentence_uniform_fallback(self):
        ab = estimate_abstract(count_abstract([io_sentence("O")]))
        assert ab.from_o == {"O": 0.0, "I": 0.0, "END": 1.0}
        assert ab.from_start == {"O": 1.0, "I": 0.0}
        assert ab.from_i == {"O": 0.25, "I": 0.25, "I-Other": 0.25, "END": 0.25}

    def test_rows_always_sum_to_one(self):
        rng = random.Random(23)
        for _ in range(30):
            corpus = random_io_corpus(rng, rng.randint(1, 10))
            ab = estimate_abstract(count_abstract(corpus))
            for row in (ab.from_start, ab.from_o, ab.from_i):
                assert sum(row.values()) == pytest.approx(1.0, abs=1e-9)

    def test_incoming_mode_matches_hand_computation(self):
        counts = count_abstract([io_sentence("O", "I-PER", "I-PER", "O")])
        ab = estimate_abstract(counts, mode="incoming")
        # incoming totals: O <- {START,I} = 2, I <- {O,I} = 2, END <- {O} = 1
        assert ab.from_o == {"O": 0.0, "I": 0.5, "END": 1.0}
        assert ab.from_i["O"] == 0.5
        assert ab.from_start["O"] == 0.5

    def test_empty_counts_rejected(self):
        from fewner.transitions import TransitionCounts

        with pytest.raises(ValueError):
            estimate_abstract(TransitionCounts(counts={}))


class TestExpand:
    def test_even_split_from_o(self):
        ab = AbstractTransitions(
            from_start={"O": 0.5, "I": 0.5},
            from_o={"O": 0.3, "I": 0.5, "END": 0.2},
            from_i={"O": 0.4, "I": 0.3, "I-Other": 0.2, "END": 0.1},
        )
        ex = expand(ab, ["PER", "LOC"])
        o_row = ex.matrix[1]
        assert o_row[1] == pytest.approx(0.25)
        assert o_row[2] == pytest.approx(0.25)

    def test_cross_class_split(self):
        ab = AbstractTransitions(
            from_start={"O": 1.0, "I": 0.0},
            from_o={"O": 0.8, "I": 0.1, "END": 0.1},
            from_i={"O": 0.4, "I": 0.3, "I-Other": 0.2, "END": 0.1},
        )
        ex = expand(ab, ["A", "B", "C"])
        # row for I-A: cross cells to I-B and I-C get 0.2/2 each
        row = ex.matrix[2]
        assert row[2] == pytest.approx(0.1)
        assert row[3] == pytest.approx(0.1)
        assert row[1] == pytest.approx(0.3)

    def test_single_class_folds_cross_mass(self, caplog):
        ab = AbstractTransitions(
            from_start={"O": 1.0, "I": 0.0},
            from_o={"O": 0.8, "I": 0.1, "END": 0.1},
            from_i={"O": 0.2, "I": 0.5, "I-Other": 0.2, "END": 0.1},
        )
        with caplog.at_level("WARNING"):
            ex = expand(ab, ["PER"])
        assert ex.matrix[2][1] == pytest.approx(0.7)
        assert "single target class" in caplog.text

    def test_row_stochastic_for_all_sizes(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            ab = random_abstract(rng)
            for n in range(1, 7):
                ex = expand(ab, [f"C{i}" for i in range(n)])
                sums = ex.matrix.sum(axis=1)
                assert np.allclose(sums, 1.0, atol=1e-9)

    def test_start_has_no_incoming_and_end_no_outgoing(self):
        rng = np.random.default_rng(31)
        ex = expand(random_abstract(rng), ["X", "Y"])
        assert ex.matrix.shape == (4, 4)
        assert ex.matrix[0, -1] == 0.0  # START -> END impossible
        assert ex.row_states()[0] == "START"
        assert ex.col_states()[-1] == "END"

    def test_duplicate_classes_rejected(self):
        rng = np.random.default_rng(33)
        with pytest.raises(ValueError):
            expand(random_abstract(rng), ["A", "A"])


class TestApplyTemperature:
    def make(self, row):
        ab = AbstractTransitions(
            from_start={"O": 0.5, "I": 0.5},
            from_o={"O": row[0], "I": row[1], "END": 0.0},
            from_i={"O": 0.25, "I": 0.25, "I-Other": 0.25, "END": 0.25},
        )
        return expand(ab, ["PER"])

    def test_tau_one_is_identity(self):
        ex = self.make([0.8, 0.2])
        out = apply_temperature(ex, 1.0)
        assert np.allclose(out.matrix, ex.matrix, atol=1e-12)

    def test_sqrt_renormalization(self):
        out = apply_temperature(self.make([0.8, 0.2]), 0.5)
        assert out.matrix[1][0] == pytest.approx(2.0 / 3.0)
        assert out.matrix[1][1] == pytest.approx(1.0 / 3.0)

    def test_tiny_tau_flattens_to_uniform_over_support(self):
        out = apply_temperature(self.make([0.8, 0.2]), 1e-6)
        assert out.matrix[1][0] == pytest.approx(0.5, abs=1e-5)
        assert out.matrix[1][1] == pytest.approx(0.5, abs=1e-5)

    def test_zeros_stay_zero(self):
        ex = self.make([1.0, 0.0])
        out = apply_temperature(ex, 0.25)
        assert out.matrix[1][1] == 0.0
        assert out.matrix[1][0] == pytest.approx(1.0)

    def test_nonpositive_tau_rejected(self):
        with pytest.raises(ValueError):
            apply_temperature(self.make([0.5, 0.5]), 0.0)

    def test_preserves_argmax_and_order(self):
        rng = np.random.default_rng(37)
        for _ in range(50):
            ex = expand(random_abstract(rng), ["A", "B", "C"])
            tau = float(rng.uniform(0.05, 3.0))
            out = apply_temperature(ex, tau)
            for before, after in zip(ex.matrix, out.matrix):
                assert np.argmax(before) == np.argmax(after)
                nz = before > 0
                order_before = np.argsort(before[nz], kind="stable")
                order_after = np.argsort(after[nz], kind="stable")
                assert np.array_equal(order_before, order_after)


class TestUniform:
    def test_rows_sum_to_one(self):
        ex = uniform_transitions(["A", "B"])
        assert np.allclose(ex.matrix.sum(axis=1), 1.0)
        assert ex.matrix[0, -1] == 0.0


class TestSerialization:
    def test_abstract_round_trip(self, tmp_path):
        rng = np.random.default_rng(41)
        ab = random_abstract(rng)
        path = tmp_path / "trans.txt"
        save_transitions(ab, path)
        loaded = load_transitions(path)
        assert isinstance(loaded, AbstractTransitions)
        assert loaded.from_start == ab.from_start
        assert loaded.from_o == ab.from_o
        assert loaded.from_i == ab.from_i

    def test_expanded_round_trip(self, tmp_path):
        rng = np.random.default_rng(43)
        ex = apply_temperature(expand(random_abstract(rng), ["PER", "LOC"]), 0.01)
        path = tmp_path / "trans.txt"
        save_transitions(ex, path)
        loaded = load_transitions(path)
        assert isinstance(loaded, ExpandedTransitions)
        assert loaded.classes == ex.classes
        assert loaded.tau == ex.tau
        assert np.array_equal(loaded.matrix, ex.matrix)

    def test_rejects_other_files(self, tmp_path):
        path = tmp_path / "nope.txt"
        path.write_text("hello\n")
        with pytest.raises(ValueError):
            load_transitions(path)
