import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polysent import SentimentLabel, SplitSpec, stratified_split, stratum_allocation
from polysent.corpus import LabeledSample
from polysent.splitter import DatasetSplit, stratum_table

# --- brute-force apportionment oracle ---------------------------------------
# Largest-remainder allocation minimizes the total absolute deviation from
# the exact quotas; ties resolve in favor of the earlier split. So: enumerate
# every integer triple summing to n, keep the minimum-deviation set, and pick
# its lexicographically largest element (more to train, then to val).


def allocation_oracle(n, ratios):
    quotas = [Fraction(r) * n for r in ratios]
    best_key, best = None, None
    for a in range(n + 1):
        for b in range(n - a + 1):
            c = n - a - b
            deviation = sum(abs(x - q) for x, q in zip((a, b, c), quotas))
            key = (deviation, -a, -b)
            if best_key is None or key < best_key:
                best_key, best = key, (a, b, c)
    return best


def mk(i, language, ordinal):
    return LabeledSample(
        f"s:{i:05d}", f"texto {i}", language, SentimentLabel(ordinal), [1, 3, 5][ordinal]
    )


def make_corpus(languages, per_stratum, start=0):
    corpus = []
    i = start
    for language in languages:
        for ordinal in range(3):
            for _ in range(per_stratum):
                corpus.append(mk(i, language, ordinal))
                i += 1
    return corpus


def split_ids(split):
    return [
        [s.id for s in split.train],
        [s.id for s in split.val],
        [s.id for s in split.test],
    ]


ratio_triples = st.tuples(
    st.integers(1, 20), st.integers(0, 10), st.integers(0, 10)
).map(lambda w: tuple(x / sum(w) for x in w))


class TestStratumAllocation:
    @pytest.mark.parametrize(
        "n,ratios,expected",
        [
            (10, (0.8, 0.1, 0.1), (8, 1, 1)),
            (7, (0.8, 0.1, 0.1), (5, 1, 1)),  # two leftover seats to the 0.7 remainders
            (1, (0.8, 0.1, 0.1), (1, 0, 0)),
            (3, (0.8, 0.1, 0.1), (3, 0, 0)),  # remainder 0.4 beats the two 0.3s
            (0, (0.8, 0.1, 0.1), (0, 0, 0)),
            (2, (0.5, 0.25, 0.25), (1, 1, 0)),  # remainder tie broken toward val
            (100, (0.8, 0.1, 0.1), (80, 10, 10)),
        ],
    )
    def test_frozen_cases(self, n, ratios, expected):
        assert allocation_oracle(n, ratios) == expected
        assert stratum_allocation(n, ratios) == expected

    def test_negative_n(self):
        with pytest.raises(ValueError):
            stratum_allocation(-1, (0.8, 0.1, 0.1))

    @given(st.integers(0, 60), ratio_triples)
    @settings(max_examples=300)
    def test_matches_oracle(self, n, ratios):
        assert stratum_allocation(n, ratios) == allocation_oracle(n, ratios)

    @given(st.integers(0, 500), ratio_triples)
    def test_sums_and_quota_deviation(self, n, ratios):
        allocation = stratum_allocation(n, ratios)
        assert sum(allocation) == n
        for got, ratio in zip(allocation, ratios):
            assert abs(got - n * ratio) < 1.0


class TestStratifiedSplit:
    def test_exact_quotas_per_stratum(self):
        corpus = make_corpus(["ar", "en", "es", "fr"], 100)
        split = stratified_split(corpus, SplitSpec(seed=42))
        table = stratum_table(split)
        assert len(table) == 12
        for counts in table.values():
            assert (counts["train"], counts["val"], counts["test"]) == (80, 10, 10)

    def test_deterministic(self):
        corpus = make_corpus(["es", "fr"], 25)
        a = stratified_split(corpus, SplitSpec(seed=7))
        b = stratified_split(corpus, SplitSpec(seed=7))
        assert split_ids(a) == split_ids(b)

    def test_disjoint_and_total(self):
        corpus = make_corpus(["es", "fr", "ar"], 17)
        split = stratified_split(corpus, SplitSpec(seed=3))
        ids = [i for part in split_ids(split) for i in part]
        assert len(ids) == len(corpus)
        assert len(set(ids)) == len(ids)
        assert set(ids) == {s.id for s in corpus}

    def test_three_sample_stratum_goes_to_train(self):
        corpus = [mk(i, "es", 0) for i in range(3)]
        split = stratified_split(corpus, SplitSpec(seed=1))
        assert (len(split.train), len(split.val), len(split.test)) == (3, 0, 0)

    def test_seed_changes_membership_not_counts(self):
        corpus = make_corpus(["es", "fr"], 30)
        splits = [stratified_split(corpus, SplitSpec(seed=seed)) for seed in range(12)]
        tables = [stratum_table(s) for s in splits]
        assert all(t == tables[0] for t in tables[1:])
        memberships = {tuple(tuple(part) for part in split_ids(s)) for s in splits}
        assert len(memberships) > 1

    def test_input_order_irrelevant(self):
        corpus = make_corpus(["es", "fr", "ar"], 11)
        shuffled = corpus[:]
        random.Random(99).shuffle(shuffled)
        assert split_ids(stratified_split(corpus, SplitSpec(seed=5))) == split_ids(
            stratified_split(shuffled, SplitSpec(seed=5))
        )

    def test_adding_a_language_leaves_existing_strata_alone(self):
        base = make_corpus(["es", "fr"], 13)
        extended = base + make_corpus(["ar"], 13, start=len(base))
        spec = SplitSpec(seed=8)
        before = stratified_split(base, spec)
        after = stratified_split(extended, spec)
        base_ids = {s.id for s in base}
        for name in ("train", "val", "test"):
            kept = [s.id for s in getattr(after, name) if s.id in base_ids]
            assert kept == [s.id for s in getattr(before, name)]

    def test_empty_corpus(self):
        with pytest.raises(ValueError, match="empty"):
            stratified_split([], SplitSpec())

    @given(
        st.lists(
            st.tuples(st.sampled_from(["es", "en", "fr"]), st.integers(0, 2)),
            min_size=1,
            max_size=120,
        ),
        st.integers(0, 2**63 - 1),
        ratio_triples,
    )
    @settings(max_examples=150)
    def test_properties_random_corpora(self, pairs, seed, ratios):
        corpus = [mk(i, lang, ordinal) for i, (lang, ordinal) in enumerate(pairs)]
        split = stratified_split(corpus, SplitSpec(ratios=ratios, seed=seed))
        ids = [i for part in split_ids(split) for i in part]
        assert len(ids) == len(corpus) and len(set(ids)) == len(ids)
        for counts in stratum_table(split).values():
            n = counts["total"]
            for name, ratio in zip(("train", "val", "test"), ratios):
                assert abs(counts[name] - n * ratio) < 1.0


class TestSplitSpec:
    def test_defaults(self):
        spec = SplitSpec()
        assert spec.ratios == (0.8, 0.1, 0.1)

    @pytest.mark.parametrize(
        "ratios",
        [(0.8, 0.1), (0.5, 0.5, 0.5), (-0.1, 0.6, 0.5), (0.8, 0.1, 0.2)],
    )
    def test_invalid_ratios(self, ratios):
        with pytest.raises(ValueError):
            SplitSpec(ratios=ratios)


def test_dataset_split_len():
    corpus = make_corpus(["es"], 10)
    split = stratified_split(corpus, SplitSpec())
    assert len(split) == 30
    assert isinstance(split, DatasetSplit)
