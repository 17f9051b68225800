import itertools

import pytest
from hypothesis import given, settings, strategies as st

from conftest import S8_LOWSTAR, T7_LOWSTAR, s8, t7
from oracles import rank_lowstar
from pmsreduce.boundary import BoundaryMatrix
from pmsreduce.complex import PointCloud, build_vietoris_rips
from pmsreduce.metrics import Reference, Trace, TraceCounters, essential_indices
from pmsreduce.pms import (
    PmsOptions,
    ReductionState,
    SchedulePolicy,
    clear_by_compression,
    estimate_essential,
    find_local_injections,
    phase0_init,
    phase2_parallel_reduce,
    reduce_pms,
)

clouds = st.integers(2, 7).flatmap(
    lambda n: st.lists(
        st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3), min_size=n, max_size=n
    )
)

ALL_OPTIONS = [
    PmsOptions(enable_compression_clearing=cc, processor_cap=cap, schedule_policy=pol)
    for cc, cap, pol in itertools.product(
        (False, True), (None, 1, 2), (SchedulePolicy.ALL, SchedulePolicy.BIG_NBHD, SchedulePolicy.NEG_FIRST)
    )
]


def vr_matrix(points, r_max, max_dim):
    return build_vietoris_rips(PointCloud(points), r_max, 4, max_dim).boundary_matrix()


def double_filled_triangle():
    # two triangles (7, 8) sharing the boundary {4, 5, 6}
    cols = [[], [], [], [1, 2], [1, 3], [2, 3], [4, 5, 6], [4, 5, 6]]
    return BoundaryMatrix(cols, [0, 0, 0, 1, 1, 1, 2, 2])


class TestPhase0:
    def test_t7(self):
        state = ReductionState(t7())
        assert phase0_init(state) == {4, 5, 7}
        assert state.cleared == {6}
        assert state.current_low() == T7_LOWSTAR

    def test_zero_matrix(self):
        state = ReductionState(BoundaryMatrix([[]] * 3))
        assert phase0_init(state) == set()

    def test_s8(self):
        state = ReductionState(s8())
        assert phase0_init(state) == {5, 6, 7}
        assert state.cleared == set()
        assert state.low[8] == 4
        assert state.unresolved() == 1


class TestLocalInjections:
    def test_duplicate_blocks(self):
        state = ReductionState(BoundaryMatrix([[], [], [], [1, 2], [1, 3], [2, 3]], [0, 0, 0, 1, 1, 1]))
        assert find_local_injections(state, 1) == {4, 5}

    def test_lowerbound_blocks_later_unique_low(self):
        cols = [[]] * 5 + [[1, 2], [1, 3], [1, 5], [2, 5], [3, 4]]
        state = ReductionState(BoundaryMatrix(cols, [0] * 5 + [1] * 5))
        assert [state.low[j] for j in range(6, 11)] == [2, 3, 5, 5, 4]
        assert find_local_injections(state, 1) == {6, 7, 8}

    def test_all_pivots_no_change(self):
        state = ReductionState(t7())
        phase0_init(state)
        assert find_local_injections(state, 1) == set()
        assert find_local_injections(state, 2) == set()


class TestPhase2:
    def test_s8_steps(self):
        state = ReductionState(s8())
        phase0_init(state)
        counters = TraceCounters()
        lows = []
        for _ in range(3):
            assert phase2_parallel_reduce(state, PmsOptions(), counters) == 1
            lows.append(state.low[8])
        assert lows == [3, 2, 0]
        assert state.matrix.column(8) == []
        assert counters.col_adds == 3
        assert phase2_parallel_reduce(state, PmsOptions(), counters) == 0

    def test_reduced_matrix_is_a_fixpoint(self):
        state = ReductionState(t7())
        phase0_init(state)
        assert phase2_parallel_reduce(state, PmsOptions(), TraceCounters()) == 0


class TestCompression:
    def test_zero_width_interval_confirms_pivot(self):
        state = ReductionState(BoundaryMatrix([[], [], [1, 2]], [0, 0, 1]))
        assert state.beta[3] == state.low[3] == 2
        assert clear_by_compression(state) == 1
        assert state.pivots == {3}

    def test_all_rows_paired_clears_column(self):
        matrix = double_filled_triangle()
        assert rank_lowstar(matrix.columns())[7] == 0
        state = ReductionState(matrix)
        phase0_init(state)
        assert state.beta[8] == 0 and state.low[8] == 6
        assert clear_by_compression(state) == 1
        assert 8 in state.cleared
        assert state.current_low() == rank_lowstar(double_filled_triangle().columns())

    def test_two_candidates_no_action(self):
        state = ReductionState(s8())
        phase0_init(state)
        # column 8: beta 0, row 1 unpaired, so L = {0, 1}
        assert clear_by_compression(state) == 0
        assert state.low[8] == 4


class TestEssential:
    def test_t7(self):
        state = ReductionState(t7())
        phase0_init(state)
        assert state.paired == {2, 3, 4, 5, 6, 7}
        assert estimate_essential(state) == {1}

    def test_first_application(self):
        state = ReductionState(s8())
        initial_lows = set(state.low)
        expected = set(range(1, 9)) - initial_lows - state.paired
        assert estimate_essential(state) == expected

    @settings(max_examples=40, deadline=None)
    @given(clouds, st.floats(0.2, 3), st.integers(1, 3))
    def test_exact_when_reduced(self, points, r_max, max_dim):
        matrix = vr_matrix(points, r_max, max_dim)
        lowstar = rank_lowstar(matrix.columns())
        trace = Trace("pms", Reference.from_lowstar(lowstar))
        reduce_pms(matrix, trace=trace)
        assert trace.records[-1].essential_precision == 1


class TestReducePms:
    def test_t7_converges_at_zero(self):
        result = reduce_pms(t7())
        assert result.low == T7_LOWSTAR
        assert result.converged and result.iterations == 0

    def test_s8(self):
        result = reduce_pms(s8())
        assert result.low == S8_LOWSTAR
        assert result.iterations == 3
        assert sum(result.column_adds) == 3

    def test_s8_partial(self):
        result = reduce_pms(s8(), PmsOptions(max_iter=1))
        assert result.low == [0, 0, 0, 0, 2, 3, 4, 3]
        assert not result.converged

    def test_trace_rows(self):
        trace = Trace("pms", Reference.from_lowstar(S8_LOWSTAR))
        reduce_pms(s8(), trace=trace)
        assert [r.iter for r in trace.records] == [0, 1, 2, 3]
        assert [r.col_adds for r in trace.records] == [0, 1, 1, 1]

    def test_persistence_policy_is_not_available(self):
        with pytest.raises(NotImplementedError):
            PmsOptions(schedule_policy=SchedulePolicy.PERSISTENCE)

    @pytest.mark.parametrize("kwargs", [{"max_iter": 0}, {"processor_cap": 0}, {"workers": -1}])
    def test_rejects_bad_options(self, kwargs):
        with pytest.raises(ValueError):
            PmsOptions(**kwargs)


def _two_pivot_state(cols):
    state = ReductionState(BoundaryMatrix(cols, [0, 0, 0] + [1] * (len(cols) - 3)))
    phase0_init(state)
    assert state.pivots == {4, 5}
    return state


@pytest.mark.parametrize("policy, reduced", [(SchedulePolicy.ALL, {6}), (SchedulePolicy.BIG_NBHD, {7, 8})])
def test_big_nbhd_picks_largest_neighbourhood(policy, reduced):
    # pivot 4 (low 2) has neighbour {6}; pivot 5 (low 3) has {7, 8}
    state = _two_pivot_state([[], [], [], [1, 2], [1, 3], [1, 2], [1, 3], [2, 3]])
    before = state.current_low()
    phase2_parallel_reduce(state, PmsOptions(processor_cap=1, schedule_policy=policy), TraceCounters())
    changed = {j for j in range(1, 9) if state.low[j] != before[j - 1]}
    assert changed == reduced


@pytest.mark.parametrize("policy, reduced", [(SchedulePolicy.ALL, 6), (SchedulePolicy.NEG_FIRST, 7)])
def test_neg_first_prefers_known_negative_columns(policy, reduced):
    # pivot 4 has neighbour 6, pivot 5 has neighbour 7; only 7 carries a pin
    state = _two_pivot_state([[], [], [], [1, 2], [1, 3], [1, 2], [1, 3]])
    state.pins[7] = 1
    before = state.current_low()
    phase2_parallel_reduce(state, PmsOptions(processor_cap=1, schedule_policy=policy), TraceCounters())
    assert [j for j in range(1, 8) if state.low[j] != before[j - 1]] == [reduced]


def _invariant_observer(lowstar, log):
    truth = essential_indices(lowstar)

    def observe(state):
        low = state.current_low()
        for j in range(1, state.m + 1):
            assert state.beta[j] <= low[j - 1] or (low[j - 1] == 0 and lowstar[j - 1] == 0)
        for p in state.pivots:
            assert low[p - 1] == lowstar[p - 1]
        for c in state.cleared:
            assert lowstar[c - 1] == 0
        for j, pin in state.pins.items():
            assert lowstar[j - 1] == pin
        assert truth <= state.essential_estimate
        if log:
            prev = log[-1]
            assert prev["pivots"] <= state.pivots
            assert prev["cleared"] <= state.cleared
            assert state.essential_estimate <= prev["estimate"]
            assert state.unresolved() <= prev["unresolved"]
        log.append(
            {
                "pivots": set(state.pivots),
                "cleared": set(state.cleared),
                "estimate": set(state.essential_estimate),
                "unresolved": state.unresolved(),
            }
        )

    return observe


@settings(max_examples=40, deadline=None)
@given(clouds, st.floats(0.2, 3), st.integers(1, 3), st.sampled_from(ALL_OPTIONS))
def test_invariants_and_oracle_equivalence(points, r_max, max_dim, opts):
    matrix = vr_matrix(points, r_max, max_dim)
    lowstar = rank_lowstar(matrix.columns())
    log = []
    result = reduce_pms(matrix, opts, observer=_invariant_observer(lowstar, log))
    assert result.converged
    assert result.low == lowstar


@settings(max_examples=15, deadline=None)
@given(clouds, st.floats(0.5, 3))
def test_workers_do_not_change_results(points, r_max):
    runs = []
    for workers in (0, 1, 4):
        matrix = vr_matrix(points, r_max, 3)
        trace = Trace("pms", Reference.from_lowstar(rank_lowstar(matrix.columns())))
        result = reduce_pms(matrix, PmsOptions(workers=workers, processor_cap=2), trace)
        runs.append((result.low, result.column_adds, result.iterations, trace.records, matrix.columns()))
    assert runs[0] == runs[1] == runs[2]
