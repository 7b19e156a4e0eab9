import io

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ifthen.graph import EventPhrase, Split
from ifthen.ingest import (
    CorefVoteRecord,
    FrequencySource,
    FrequencyTable,
    IngestError,
    blank_infrequent_args,
    content_key,
    default_stopwords,
    filter_coref_combinations,
    load_frequency_table,
    normalize_event,
    split_events,
)

NAMES = {"alex", "taylor", "jordan", "sam"}


class TestNormalizeEvent:
    def test_two_names(self):
        ev = normalize_event("Alex buys Taylor coffee", NAMES)
        assert ev.text == "PersonX buys PersonY coffee"

    def test_already_normalized_unchanged(self):
        ev = normalize_event("PersonX bakes bread", NAMES)
        assert ev.text == "PersonX bakes bread"

    def test_repeated_name_same_variable(self):
        ev = normalize_event("Alex breaks Alex's arm", NAMES)
        assert ev.text == "PersonX breaks PersonX's arm"

    def test_existing_variables_reserved(self):
        ev = normalize_event("PersonX buys Taylor coffee", NAMES)
        assert ev.text == "PersonX buys PersonY coffee"

    def test_too_many_names(self):
        with pytest.raises(IngestError):
            normalize_event("Alex asks Taylor and Jordan about Sam", NAMES)

    def test_idempotent(self):
        once = normalize_event("Alex buys Taylor coffee", NAMES)
        twice = normalize_event(once.text, NAMES)
        assert once == twice


class TestBlanking:
    @pytest.fixture
    def freq(self):
        return FrequencyTable(
            counts={("drinks", "dark roast"): 2, ("drinks", "coffee"): 50},
            source=FrequencySource.Stories,
        )

    def test_infrequent_argument_blanked(self, freq):
        ev = EventPhrase.from_text("drinks dark roast in the morning")
        assert blank_infrequent_args(ev, freq, 5).text == "drinks ___ in the morning"

    def test_frequent_argument_kept(self, freq):
        ev = EventPhrase.from_text("drinks coffee in the morning")
        assert blank_infrequent_args(ev, freq, 5).text == ev.text

    def test_idempotent(self, freq):
        ev = EventPhrase.from_text("drinks ___ in the morning")
        assert blank_infrequent_args(ev, freq, 5).text == ev.text

    def test_verb_never_blanked(self):
        freq = FrequencyTable(
            counts={("drinks", "drinks"): 1}, source=FrequencySource.Stories
        )
        ev = EventPhrase.from_text("drinks drinks")
        out = blank_infrequent_args(ev, freq, 5)
        assert out.tokens[0] == "drinks"

    def test_no_verb_is_error(self, freq):
        ev = EventPhrase.from_text("PersonX ___")
        with pytest.raises(IngestError):
            blank_infrequent_args(ev, freq, 5)

    def test_default_threshold_by_source(self):
        stories = FrequencyTable(counts={("a", "b"): 1}, source=FrequencySource.Stories)
        blogs = FrequencyTable(counts={("a", "b"): 1}, source=FrequencySource.Blogs)
        assert stories.default_threshold() == 5
        assert blogs.default_threshold() == 100

    def test_load_frequency_table(self):
        table = load_frequency_table(
            io.StringIO("drinks\tdark roast\t2\tstories\ndrinks\tcoffee\t50\tstories\n")
        )
        assert table.counts[("drinks", "dark roast")] == 2
        assert table.source is FrequencySource.Stories


class TestCorefFilter:
    def records(self, votes):
        return [
            CorefVoteRecord(EventPhrase.from_text(f"PersonX does thing {i}"), v)
            for i, v in enumerate(votes)
        ]

    def test_unanimous_kept(self):
        assert len(filter_coref_combinations(self.records([3]))) == 1

    def test_single_vote_dropped(self):
        assert filter_coref_combinations(self.records([1])) == []

    def test_mixed_counts(self):
        kept = filter_coref_combinations(self.records([0, 1, 2, 2, 3]))
        assert len(kept) == 3

    def test_order_preserved(self):
        kept = filter_coref_combinations(self.records([2, 0, 3]))
        assert [e.text for e in kept] == ["PersonX does thing 0", "PersonX does thing 2"]

    def test_vote_bounds(self):
        with pytest.raises(IngestError):
            CorefVoteRecord(EventPhrase.from_text("PersonX naps"), 4)


class TestContentKey:
    def test_skips_stopwords_and_variables(self):
        ev = EventPhrase.from_text("PersonX takes the dog for a walk")
        assert content_key(ev, default_stopwords()) == ("takes", "dog")

    def test_same_key_for_shared_prefix(self):
        a = EventPhrase.from_text("PersonX takes the dog for a walk")
        b = EventPhrase.from_text("PersonX takes the dog to the vet")
        sw = default_stopwords()
        assert content_key(a, sw) == content_key(b, sw)

    def test_padding(self):
        ev = EventPhrase.from_text("PersonX sleeps")
        assert content_key(ev, default_stopwords()) == ("sleeps", "")

    def test_blanks_not_content(self):
        ev = EventPhrase.from_text("PersonX drinks ___ quickly")
        assert content_key(ev, default_stopwords()) == ("drinks", "quickly")


class TestSplitEvents:
    def test_shared_key_events_stay_together(self):
        events = [
            EventPhrase.from_text("PersonX takes the dog for a walk"),
            EventPhrase.from_text("PersonX takes the dog to the vet"),
        ] + [EventPhrase.from_text(f"PersonX does thing {i}") for i in range(20)]
        for seed in range(5):
            a = split_events(events, seed=seed)
            assert (
                a.assignment["PersonX takes the dog for a walk"]
                is a.assignment["PersonX takes the dog to the vet"]
            )

    def test_singleton_groups_exact_ratio(self):
        events = [EventPhrase.from_text(f"PersonX item{i}") for i in range(10)]
        a = split_events(events, seed=3)
        counts = {s: 0 for s in Split}
        for s in a.assignment.values():
            counts[s] += 1
        assert counts == {Split.Train: 8, Split.Dev: 1, Split.Test: 1}

    def test_deterministic(self):
        events = [EventPhrase.from_text(f"PersonX item{i}") for i in range(30)]
        assert split_events(events, seed=7) == split_events(events, seed=7)

    def test_too_few_groups(self):
        events = [EventPhrase.from_text("PersonX naps")]
        with pytest.raises(IngestError):
            split_events(events)

    def test_bad_ratios(self):
        events = [EventPhrase.from_text(f"PersonX item{i}") for i in range(10)]
        with pytest.raises(IngestError):
            split_events(events, ratios=(0.5, 0.5, 0.5))

    @settings(max_examples=30, deadline=None)
    @given(
        seed=st.integers(0, 10_000),
        keys=st.lists(st.integers(0, 40), min_size=10, max_size=120),
    )
    def test_bucketing_invariant(self, seed, keys):
        assume(len(set(keys)) >= 3)
        events = [
            EventPhrase.from_text(f"key{k} shared tail{i}") for i, k in enumerate(keys)
        ]
        sw = default_stopwords()
        a = split_events(events, seed=seed, stopwords=sw)
        by_key = {}
        for ev in events:
            by_key.setdefault(content_key(ev, sw), set()).add(a.assignment[ev.text])
        assert all(len(splits) == 1 for splits in by_key.values())
