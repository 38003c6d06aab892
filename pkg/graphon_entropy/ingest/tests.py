import tempfile
from datetime import date
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from estimators.registry import EstimatorOptions
from graphons.entropy import block_entropy
from graphons.exceptions import DomainError
from graphons.specs import GraphonSpec
from sampler.graphs import Graph
from sampler.sampling import derive_seed, sample_graph, sample_latents

from .parsing import EdgeRecord, IngestError, load_graph, parse_edge_list, parse_timestamp, write_edge_records
from .snapshots import SnapshotSeries, build_snapshots, parse_window
from .timeseries import (
    FLAG_TOO_FEW_NODES, entropy_timeseries, read_timeseries_csv, write_timeseries_csv,
)


class TempFileMixin:
    def setUp(self):
        super().setUp()
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)

    def write(self, text, name='input.edges'):
        path = self.tmp / name
        path.write_text(text)
        return path


class ParseEdgeListTests(TempFileMixin, SimpleTestCase):
    def test_path_of_three_nodes(self):
        graph = parse_edge_list(self.write("0 1\n1 2\n")).to_graph()
        self.assertEqual(graph.n, 3)
        self.assertEqual(graph.edge_count, 2)

    def test_reversed_duplicate_collapses(self):
        parsed = parse_edge_list(self.write("0 1\n1 0\n"))
        self.assertEqual(len(parsed.records), 1)
        self.assertEqual(parsed.duplicates, 1)

    def test_timestamped_records(self):
        parsed = parse_edge_list(self.write("a b 2005-05\nb c 2008-12\n"), has_timestamps=True)
        self.assertEqual(len(parsed.records), 2)
        self.assertEqual({record.t for record in parsed.records}, {date(2005, 5, 1), date(2008, 12, 1)})

    def test_same_pair_at_two_times_is_kept(self):
        parsed = parse_edge_list(self.write("a b 2005\nb a 2006\na b 2005\n"), has_timestamps=True)
        self.assertEqual(len(parsed.records), 2)
        self.assertEqual(parsed.duplicates, 1)

    def test_integer_years_stay_separate_snapshots(self):
        parsed = parse_edge_list(self.write("a b 2005\nb c 2008\n"), has_timestamps=True)
        series = build_snapshots(parsed.records, window='yearly', mode='windowed')
        self.assertEqual(series.timestamps, ('2005', '2008'))
        self.assertEqual([graph.edge_count for graph in series.graphs], [1, 1])

    def test_self_loops_comments_and_malformed_lines(self):
        text = "# header\n0 1\n2 2\nlonely\n\n1 2\n"
        with self.assertLogs('ingest.parsing', 'WARNING') as logs:
            parsed = parse_edge_list(self.write(text))
        self.assertEqual(len(parsed.records), 2)
        self.assertEqual(parsed.self_loops, 1)
        self.assertEqual(parsed.malformed, (4,))
        self.assertIn('4', logs.output[0])

    def test_bad_timestamp_is_malformed(self):
        parsed = parse_edge_list(self.write("a b 2005-05\nb c soon\n"), has_timestamps=True)
        self.assertEqual(parsed.malformed, (2,))

    def test_declared_delimiter(self):
        parsed = parse_edge_list(self.write("alice, bob\nbob, carol\n"), delimiter=',')
        self.assertEqual(parsed.node_tokens(), ['alice', 'bob', 'carol'])

    def test_integer_tokens_order_numerically(self):
        parsed = parse_edge_list(self.write("10 2\n2 3\n"))
        self.assertEqual(parsed.node_tokens(), ['2', '3', '10'])
        self.assertEqual(parsed.records[0], EdgeRecord('2', '10'))

    def test_unreadable_file(self):
        with self.assertRaises(IngestError):
            parse_edge_list(self.tmp / 'missing.edges')

    def test_no_valid_edge(self):
        with self.assertRaises(IngestError):
            parse_edge_list(self.write("# only comments\n3 3\n"))

    def test_parse_write_parse_is_stable(self):
        first = parse_edge_list(self.write("b a 2005-05\nc b 1199145600\na b 2005-05\n"), has_timestamps=True)
        path = write_edge_records(first.records, self.tmp / 'canonical.edges')
        second = parse_edge_list(path, has_timestamps=True)
        self.assertEqual(first.records, second.records)
        self.assertEqual(path.read_text(), write_edge_records(second.records, self.tmp / 'again.edges').read_text())

    def test_timestamp_forms(self):
        self.assertEqual(parse_timestamp('1199145600'), 1199145600)
        self.assertEqual(parse_timestamp('2009-08-05'), date(2009, 8, 5))
        with self.assertRaises(ValueError):
            parse_timestamp('August 2009')


class LoadGraphTests(TempFileMixin, SimpleTestCase):
    def test_header_keeps_isolated_nodes(self):
        path = Graph.empty(10).write_edge_list(self.tmp / 'empty.edges')
        graph = load_graph(path)
        self.assertEqual(graph.n, 10)
        self.assertEqual(graph.edge_count, 0)

    def test_header_keeps_indices(self):
        original = Graph.from_edges(6, [(0, 5), (2, 3)])
        graph = load_graph(original.write_edge_list(self.tmp / 'g.edges'))
        np.testing.assert_array_equal(graph.upper, original.upper)

    def test_plain_token_file(self):
        graph = load_graph(self.write("x y\ny z\nz x\n"))
        self.assertEqual(graph.n, 3)
        self.assertEqual(graph.edge_count, 3)


def records(*rows):
    return [EdgeRecord.canonical(u, v, parse_timestamp(t)) for u, v, t in rows]


class BuildSnapshotsTests(SimpleTestCase):
    def test_single_window_is_the_full_graph(self):
        edges = records(('a', 'b', '2005-01'), ('b', 'c', '2005-06'), ('c', 'd', '2005-12'))
        series = build_snapshots(edges, window='yearly', mode='windowed')
        self.assertEqual(series.timestamps, ('2005',))
        full = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        np.testing.assert_array_equal(series.graphs[0].upper, full.upper)

    def test_cumulative_edge_counts_never_drop(self):
        edges = records(('a', 'b', '2005-01'), ('b', 'c', '2006-03'), ('a', 'b', '2007-01'),
                        ('c', 'd', '2007-05'), ('a', 'd', '2009-02'))
        series = build_snapshots(edges, window='yearly', mode='cumulative')
        counts = [graph.edge_count for graph in series.graphs]
        self.assertEqual(counts, sorted(counts))
        self.assertEqual(counts[-1], 4)

    def test_two_years_windowed(self):
        series = build_snapshots(records(('a', 'b', '2005-05'), ('b', 'c', '2008-12')),
                                 window='yearly', mode='windowed')
        self.assertEqual(series.timestamps, ('2005', '2008'))
        self.assertEqual([graph.edge_count for graph in series.graphs], [1, 1])

    def test_every_snapshot_spans_the_universe(self):
        series = build_snapshots(records(('a', 'b', '2005-05'), ('c', 'd', '2005-07')),
                                 window='monthly', mode='windowed')
        self.assertEqual(series.timestamps, ('2005-05', '2005-07'))
        self.assertEqual({graph.n for graph in series.graphs}, {len(series.universe)})

    def test_integer_keys_sort_numerically(self):
        edges = [EdgeRecord('a', 'b', 999), EdgeRecord('b', 'c', 2005), EdgeRecord('c', 'd', 2005)]
        series = build_snapshots(edges, window='monthly', mode='cumulative')
        self.assertEqual(series.timestamps, ('999', '2005'))
        self.assertEqual([graph.edge_count for graph in series.graphs], [1, 3])

    def test_calendar_window_rejects_mixed_keys(self):
        with self.assertRaises(DomainError):
            build_snapshots([EdgeRecord('a', 'b', 2005), EdgeRecord('b', 'c', date(2006, 1, 1))])

    def test_missing_timestamps(self):
        with self.assertRaises(DomainError):
            build_snapshots([EdgeRecord('a', 'b')])

    def test_custom_boundaries(self):
        edges = [EdgeRecord('a', 'b', 1), EdgeRecord('b', 'c', 5), EdgeRecord('c', 'd', 12)]
        with self.assertLogs('ingest.snapshots', 'WARNING'):
            series = build_snapshots(edges, window=[1, 3, 10], mode='windowed')
        self.assertEqual(series.timestamps, ('1', '3', '10'))
        self.assertEqual([graph.edge_count for graph in series.graphs], [1, 0, 1])
        self.assertEqual(len(series.universe), 4)

    def test_boundaries_must_increase(self):
        with self.assertRaises(DomainError):
            build_snapshots([EdgeRecord('a', 'b', 1)], window=[5, 3])

    def test_window_option(self):
        self.assertEqual(parse_window('monthly'), 'monthly')
        self.assertEqual(parse_window('2005-06,2006-06'), [date(2005, 6, 1), date(2006, 6, 1)])
        with self.assertRaises(DomainError):
            parse_window('weekly')


def planted_graph(within, between, n, seed):
    spec = GraphonSpec.block_constant([[within, between], [between, within]], [0.5, 0.5])
    latents = sample_latents(n, derive_seed(seed, 0))
    return sample_graph(spec, latents, derive_seed(seed, 1))


class EntropyTimeseriesTests(SimpleTestCase):
    def series(self, *graphs):
        labels = tuple(str(2000 + index) for index in range(len(graphs)))
        return SnapshotSeries(labels, graphs, {str(i): i for i in range(graphs[0].n)})

    def test_empty_snapshot_is_flagged(self):
        rows = entropy_timeseries(self.series(Graph.empty(4), Graph.complete(4)), 'h1')
        self.assertEqual(rows[0].flag, FLAG_TOO_FEW_NODES)
        self.assertIsNone(rows[0].entropy)
        self.assertEqual(rows[0].n_active, 0)
        self.assertEqual(rows[1].flag, '')

    def test_complete_snapshot_has_zero_entropy(self):
        for estimator in ('H1', 'H3'):
            rows = entropy_timeseries(self.series(Graph.complete(6)), estimator)
            self.assertEqual(rows[0].entropy, 0.0)

    def test_inactive_nodes_are_dropped(self):
        graph = Graph.from_edges(8, [(0, 1), (1, 2), (2, 0)])
        restricted = entropy_timeseries(self.series(graph), 'H1')[0]
        full = entropy_timeseries(self.series(graph), 'H1', restrict_active=False)[0]
        self.assertEqual(restricted.n_active, 3)
        self.assertEqual(restricted.entropy, 0.0)
        self.assertEqual(full.n_active, 8)
        self.assertGreater(full.entropy, 0.0)

    def test_time_constant_graph_gives_constant_series(self):
        graph = planted_graph(0.6, 0.2, 80, seed=3)
        rows = entropy_timeseries(self.series(graph, graph, graph), 'H3', EstimatorOptions(fit_seed=4))
        self.assertEqual(len({row.entropy for row in rows}), 1)

    def test_estimator_failure_is_flagged(self):
        rows = entropy_timeseries(self.series(Graph.complete(4)), 'H3', EstimatorOptions(k=9))
        self.assertTrue(rows[0].flag.startswith('error'))
        self.assertIsNone(rows[0].entropy)

    def test_unknown_estimator(self):
        with self.assertRaises(DomainError):
            entropy_timeseries(self.series(Graph.complete(4)), 'H9')

    def test_tightening_blocks_lower_the_entropy(self):
        schedule = [(0.6, 0.4), (0.7, 0.3), (0.8, 0.2), (0.9, 0.1), (0.95, 0.05)]
        graphs = [planted_graph(within, between, 200, seed=10 + index)
                  for index, (within, between) in enumerate(schedule)]
        rows = entropy_timeseries(self.series(*graphs), 'H3', EstimatorOptions(k=2, restarts=3))
        values = [row.entropy for row in rows]
        self.assertTrue(all(later < earlier for earlier, later in zip(values, values[1:])), values)
        truths = [block_entropy(np.array([[a, b], [b, a]]), [100, 100], 200) for a, b in schedule]
        self.assertTrue(all(later < earlier for earlier, later in zip(truths, truths[1:])))

    def test_csv_header_and_rows(self):
        rows = entropy_timeseries(self.series(Graph.empty(4), Graph.complete(4)), 'H1')
        with tempfile.TemporaryDirectory() as tmp:
            path = write_timeseries_csv(rows, Path(tmp) / 'ts.csv', header=[('window', 'yearly')])
            self.assertTrue(path.read_text().startswith('# window: yearly\n'))
            data = read_timeseries_csv(path)
        self.assertEqual([row['timestamp'] for row in data], ['2000', '2001'])
        self.assertEqual(data[0]['entropy'], '')
        self.assertEqual(float(data[1]['entropy']), 0.0)


class TimeseriesCommandTests(TempFileMixin, SimpleTestCase):
    TEXT = "a b 2005-03\nb c 2005-09\nc d 2006-02\nd a 2006-07\na c 2007-01\n"

    def run_timeseries(self, *args):
        stdout = StringIO()
        call_command('timeseries', '--input', str(self.write(self.TEXT)), '--out', str(self.tmp), *args,
                     stdout=stdout, stderr=StringIO())
        return read_timeseries_csv(self.tmp / 'timeseries.csv'), stdout.getvalue()

    def test_yearly_cumulative_h1(self):
        rows, output = self.run_timeseries('--timestamps', '--estimators', 'h1')
        self.assertEqual([row['timestamp'] for row in rows], ['2005', '2006', '2007'])
        self.assertEqual([int(row['n_active']) for row in rows], [3, 4, 4])
        self.assertIn('snapshots written', output)
        header = (self.tmp / 'timeseries.csv').read_text()
        for option in ('# window: yearly', '# mode: cumulative', '# estimators:'):
            self.assertIn(option, header)

    def test_two_estimators_interleave(self):
        rows, _ = self.run_timeseries('--timestamps', '--estimators', 'h1,h2', '--mode', 'windowed')
        self.assertEqual([row['estimator'] for row in rows], ['H1', 'H2'] * 3)

    def test_untimed_input_is_invalid(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_timeseries('--estimators', 'h1')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_help_lists_flags(self):
        from ingest.management.commands.timeseries import Command
        help_text = Command().create_parser('manage.py', 'timeseries').format_help()
        for flag in ('--input', '--timestamps', '--window', '--mode', '--estimators', '--k', '--out', '--bits'):
            self.assertIn(flag, help_text)
