"""Tests for cascade parsing, generation, protocol splits and featurization."""
import numpy as np
import pytest
from pydantic import ValidationError

from vnoip.data import (
    Cascade, GenConfig, ProtocolConfig, RepostEvent, build_sample, featurize_all, filter_and_split,
    format_cascade, generate_synthetic, grid_times, parse_dataset, parse_line, write_dataset,
)
from vnoip.graphs import EmbeddingConfig, EmbeddingTable
from vnoip.utils.errors import (
    ConfigError, DataError, HorizonError, LeakageError, OrderingError, ParseError, SupercriticalityError,
)

SMALL_EMBEDDING = EmbeddingConfig(dim=4, scales=(1.0,))


def chain_cascade(times, cascade_id: str = "c") -> Cascade:
    """Root 0 followed by reposts 0 -> 1 -> 2 ... at the given times."""
    events = tuple(RepostEvent(parent=i, child=i + 1, time=float(t)) for i, t in enumerate(times))
    return Cascade(cascade_id=cascade_id, root=0, publish_time=0.0, events=events)


def star_cascade(n_events: int, cascade_id: str = "s", spacing: float = 0.1) -> Cascade:
    events = tuple(RepostEvent(parent=0, child=i + 1, time=spacing * (i + 1)) for i in range(n_events))
    return Cascade(cascade_id=cascade_id, root=0, publish_time=0.0, events=events)


@pytest.fixture
def global_table() -> EmbeddingTable:
    return EmbeddingTable(np.arange(40, dtype=float).reshape(10, 4))


@pytest.fixture
def small_gen_config() -> GenConfig:
    return GenConfig(n_users=300, n_cascades=20, branching=0.5, root_influence=20.0, seed=7)


class TestCascade:
    """Popularity bookkeeping and structural checks."""

    def test_popularity(self):
        cascade = chain_cascade([2.0, 5.0])
        assert cascade.popularity_at(0.0) == 1
        assert cascade.popularity_at(2.0) == 2
        assert cascade.popularity_at(4.9) == 2
        assert cascade.popularity_at(100.0) == 3
        assert cascade.size == 3

    def test_unsorted_events(self):
        with pytest.raises(DataError):
            chain_cascade([5.0, 2.0])

    def test_unknown_parent(self):
        with pytest.raises(OrderingError):
            Cascade("x", 0, 0.0, (RepostEvent(parent=9, child=1, time=1.0),))

    def test_observed_prefix(self):
        prefix = chain_cascade([1.0, 2.0, 3.0]).observed(2.0)
        assert [e.time for e in prefix.events] == [1.0, 2.0]


class TestParser:
    """Retweet-path dataset format."""

    def test_minimal_line(self):
        cascade = parse_line("7\t1\t0\t2\t1:0 1/2:5")
        assert cascade.cascade_id == "7"
        assert cascade.root == 1
        assert cascade.events == (RepostEvent(parent=1, child=2, time=5.0),)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("")
        assert parse_dataset(path) == []

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("7\t1\t0\t2\t1:0 1/2:5\n8\t1\t0\t3\t1:0 1/2:5\n")
        with pytest.raises(ParseError) as exc_info:
            parse_dataset(path)
        assert exc_info.value.line_number == 2

    def test_paths_sorted_by_time(self):
        cascade = parse_line("9\t1\t100\t4\t1:0 1/2/3:7 1/2:3 1/4:5")
        assert [(e.parent, e.child, e.time) for e in cascade.events] == [(1, 2, 3.0), (1, 4, 5.0), (2, 3, 7.0)]

    def test_parent_not_seen(self):
        with pytest.raises(OrderingError):
            parse_line("9\t1\t0\t3\t1:0 1/2/3:2 1/2:5")

    @pytest.mark.parametrize("line", [
        "9\t1\t0\t2",
        "9\tx\t0\t1\t1:0",
        "9\t1\t0\t2\t1:0 1/2",
        "9\t1\t0\t2\t1:0 1/2:-1",
        "9\t1\t0\t2\t1:0 3/2:1",
    ])
    def test_malformed(self, line):
        with pytest.raises(ParseError):
            parse_line(line)

    def test_format_builds_chains(self):
        cascade = parse_line("9\t1\t100\t3\t1:0 1/2:3 1/2/3:7.5")
        assert format_cascade(cascade) == "9\t1\t100\t3\t1:0 1/2:3 1/2/3:7.5"

    def test_round_trip_generated(self, tmp_path, small_gen_config):
        _, cascades = generate_synthetic(small_gen_config)
        path = tmp_path / "cascades.txt"
        assert write_dataset(cascades, path) == len(cascades)
        assert parse_dataset(path) == cascades


class TestSynthetic:
    """Preferential-attachment graph and branching cascades."""

    def test_deterministic(self, small_gen_config):
        graph_a, cascades_a = generate_synthetic(small_gen_config)
        graph_b, cascades_b = generate_synthetic(small_gen_config)
        assert graph_a == graph_b
        assert cascades_a == cascades_b

    def test_no_offspring(self):
        _, cascades = generate_synthetic(GenConfig(n_users=50, n_cascades=10, branching=0.0))
        assert all(c.size == 1 for c in cascades)

    def test_supercritical(self):
        with pytest.raises(SupercriticalityError):
            generate_synthetic(GenConfig(n_users=50, n_cascades=1, branching=1.0))

    def test_graph_shape(self, small_gen_config):
        graph, _ = generate_synthetic(small_gen_config)
        assert graph.n_nodes == 300
        # clique of 3 then 2 edges per new user
        assert graph.n_edges == 3 + 2 * (300 - 3)

    def test_cascade_invariants(self, small_gen_config):
        graph, cascades = generate_synthetic(small_gen_config)
        for cascade in cascades:
            assert np.all(np.diff(cascade.event_times) >= 0)
            assert np.all(cascade.event_times <= small_gen_config.horizon)
            users = cascade.participants()
            assert len(users) == cascade.size
            assert all(0 <= u < graph.n_nodes for u in users)

    def test_mean_offspring(self):
        cfg = GenConfig(n_users=3000, n_cascades=700, branching=0.5, decay=1.0, root_influence=20.0,
                        horizon=1000.0, max_events=100_000, seed=3)
        _, cascades = generate_synthetic(cfg)
        offspring = []
        for cascade in cascades:
            counts = {e.child: 0 for e in cascade.events}
            for e in cascade.events:
                if e.parent in counts:
                    counts[e.parent] += 1
            offspring.extend(counts[e.child] for e in cascade.events if e.time < cfg.horizon - 30.0)
        assert len(offspring) >= 10_000
        assert np.mean(offspring) == pytest.approx(0.5, rel=0.05)

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            GenConfig(n_users=2, attachment_edges=2)
        with pytest.raises(ValidationError):
            GenConfig(decay=0.0)


class TestProtocol:
    """Participant filter and seeded split."""

    def test_threshold(self):
        nine = star_cascade(8, "nine")
        ten = star_cascade(9, "ten")
        train, val, test = filter_and_split([nine, ten], t_o=5.0, ratios=(1.0, 0.0, 0.0))
        assert [c.cascade_id for c in train] == ["ten"]
        assert val == [] and test == []

    def test_late_reposts_do_not_count(self):
        late = star_cascade(20, "late", spacing=1.0)
        train, _, _ = filter_and_split([late], t_o=8.0, ratios=(1.0, 0.0, 0.0))
        assert train == []

    def test_sizes(self):
        cascades = [star_cascade(12, str(i)) for i in range(100)]
        train, val, test = filter_and_split(cascades, t_o=5.0, seed=1)
        assert (len(train), len(val), len(test)) == (70, 15, 15)
        ids = {c.cascade_id for c in train + val + test}
        assert len(ids) == 100

    def test_seeded(self):
        cascades = [star_cascade(12, str(i)) for i in range(30)]
        first = filter_and_split(cascades, t_o=5.0, seed=4)
        second = filter_and_split(cascades, t_o=5.0, seed=4)
        assert [[c.cascade_id for c in part] for part in first] == [[c.cascade_id for c in part] for part in second]

    def test_bad_ratios(self):
        with pytest.raises(ConfigError):
            filter_and_split([], t_o=1.0, ratios=(0.5, 0.2, 0.2))

    def test_protocol_config(self):
        with pytest.raises(ValidationError):
            ProtocolConfig(observation_time=5.0, prediction_time=5.0)
        with pytest.raises(ValidationError):
            ProtocolConfig(split_ratios=(0.8, 0.15, 0.15))


class TestBuildSample:
    """Featurization into normalized samples."""

    def test_context_popularity(self, global_table):
        sample = build_sample(chain_cascade([2.0, 5.0]), global_table, t_o=6.0, t_p=10.0, n_grid=4,
                              embedding=SMALL_EMBEDDING)
        np.testing.assert_array_equal(sample.context_popularity, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(sample.times, [0.0, 0.2, 0.5])
        assert sample.context_trajectory[-1] == (pytest.approx(0.6), 3.0)

    def test_grid(self, global_table):
        np.testing.assert_allclose(grid_times(6.0, 10.0, 4), [7.0, 8.0, 9.0, 10.0])
        sample = build_sample(chain_cascade([2.0, 5.0, 7.5, 9.0]), global_table, t_o=6.0, t_p=10.0,
                              n_grid=4, embedding=SMALL_EMBEDDING)
        np.testing.assert_allclose(sample.grid_times, [0.7, 0.8, 0.9, 1.0])
        np.testing.assert_array_equal(sample.grid_popularity, [3.0, 4.0, 5.0, 5.0])
        assert sample.label == 2.0

    def test_saturated(self, global_table):
        sample = build_sample(chain_cascade([1.0, 2.0]), global_table, t_o=6.0, t_p=10.0, n_grid=4,
                              embedding=SMALL_EMBEDDING)
        assert sample.label == 0.0
        np.testing.assert_array_equal(sample.grid_popularity, [3.0] * 4)

    def test_target_extends_context(self, global_table):
        sample = build_sample(chain_cascade([1.0, 3.0, 7.0]), global_table, t_o=4.0, t_p=8.0, n_grid=2,
                              embedding=SMALL_EMBEDDING)
        target = sample.target_trajectory
        context = sample.context_trajectory
        assert target[:len(context)] == context
        values = [p for _, p in target]
        assert values == sorted(values)
        assert sample.label == target[-1][1] - context[-1][1]

    def test_truncation(self, global_table):
        sample = build_sample(star_cascade(150, spacing=0.01), global_table, t_o=5.0, t_p=10.0,
                              embedding=SMALL_EMBEDDING)
        assert sample.n_events == 100
        assert sample.observed_popularity == 151.0
        assert len(sample.observed_times) == 151
        assert sample.context_trajectory[-1][1] == 151.0

    def test_rows(self, global_table):
        sample = build_sample(chain_cascade([1.0, 2.0]), global_table, t_o=4.0, t_p=8.0, n_grid=2,
                              embedding=SMALL_EMBEDDING)
        np.testing.assert_array_equal(sample.global_rows, global_table.matrix[[0, 1, 2]])
        assert sample.cascade_rows.shape == (3, 4)

    def test_unknown_users_get_zero_rows(self):
        table = EmbeddingTable(np.ones((2, 4)))
        sample = build_sample(chain_cascade([1.0, 2.0]), table, t_o=4.0, t_p=8.0, n_grid=2,
                              embedding=SMALL_EMBEDDING)
        np.testing.assert_array_equal(sample.global_rows[2], np.zeros(4))

    def test_horizon(self, global_table):
        with pytest.raises(HorizonError):
            build_sample(chain_cascade([1.0]), global_table, t_o=5.0, t_p=5.0)

    def test_seal(self, global_table):
        sample = build_sample(chain_cascade([1.0, 6.0]), global_table, t_o=4.0, t_p=8.0, n_grid=2,
                              embedding=SMALL_EMBEDDING)
        sealed = sample.seal()
        assert sealed.context_trajectory == sample.context_trajectory
        for attribute in ("label", "grid_popularity", "target_trajectory"):
            with pytest.raises(LeakageError):
                getattr(sealed, attribute)
        assert sealed.label_value == 0.0

    def test_featurize_all_keeps_order(self, global_table):
        cascades = [chain_cascade([1.0] * k, cascade_id=str(k)) for k in range(1, 5)]
        protocol = ProtocolConfig(observation_time=2.0, prediction_time=4.0, n_grid=2, min_participants=1)
        samples = featurize_all(cascades, global_table, protocol, SMALL_EMBEDDING)
        assert [s.cascade_id for s in samples] == ["1", "2", "3", "4"]
