"""Optimal forward state-space search: the ground-truth and replanning engine.

A* with the admissible h_max heuristic guarantees minimum action count.
States are encoded as atom bitmasks for fast duplicate detection; the
public API speaks in :class:`~planeval.pddl.Plan` and atom sets.
"""

from __future__ import annotations

import heapq
import itertools
import shlex
import subprocess
import tempfile
import time
from pathlib import Path
from typing import Callable

from .errors import PlanningTimeout, PlanningUnsolvable
from .pddl import (
    Atom,
    DomainModel,
    GroundAction,
    Plan,
    ProblemModel,
    State,
    domain_to_pddl,
    ground,
    parse_plan,
    problem_to_pddl,
)

INF = float("inf")

DEFAULT_TIMEOUT = 10.0


def ground_all_actions(domain: DomainModel, problem: ProblemModel) -> list[GroundAction]:
    """Every type-correct grounding of every schema, in a deterministic order."""
    actions: list[GroundAction] = []
    for schema in domain.schemas:
        candidates = [problem.objects_of_type(domain, p.type) for p in schema.params]
        for combo in itertools.product(*candidates):
            actions.append(ground(schema, combo))
    return actions


class _GroundTask:
    """Bitmask encoding of one problem: atoms indexed, actions pre-encoded."""

    def __init__(self, domain: DomainModel, problem: ProblemModel):
        self.problem = problem
        self.actions = ground_all_actions(domain, problem)
        atom_index: dict[Atom, int] = {}

        def index_of(atom: Atom) -> int:
            if atom not in atom_index:
                atom_index[atom] = len(atom_index)
            return atom_index[atom]

        def mask_of(atoms) -> int:
            mask = 0
            for atom in atoms:
                mask |= 1 << index_of(atom)
            return mask

        self.init_mask = mask_of(problem.init)
        self.goal_mask = mask_of(problem.goal)
        self.encoded: list[tuple[int, int, int, int]] = []
        for i, action in enumerate(self.actions):
            self.encoded.append((
                i,
                mask_of(action.preconditions),
                mask_of(action.add_effects),
                mask_of(action.del_effects),
            ))
        self.atom_index = atom_index
        self.num_atoms = len(atom_index)
        # Precomputed per-action atom index lists for the heuristic.
        self.pre_idx = [
            [j for j in range(self.num_atoms) if pre >> j & 1]
            for _, pre, _, _ in self.encoded
        ]
        self.add_idx = [
            [j for j in range(self.num_atoms) if add >> j & 1]
            for _, _, add, _ in self.encoded
        ]
        self.goal_idx = [j for j in range(self.num_atoms) if self.goal_mask >> j & 1]

    def state_mask(self, state: State) -> int:
        mask = 0
        for atom in state:
            if atom not in self.atom_index:
                # Atoms outside the task universe can never matter to search.
                continue
            mask |= 1 << self.atom_index[atom]
        return mask


def hmax(task: _GroundTask, state: int) -> float:
    """Admissible delete-relaxation heuristic: max over goal atom levels."""
    dist = [0.0 if state >> j & 1 else INF for j in range(task.num_atoms)]
    changed = True
    while changed:
        changed = False
        for i, (_, _, _, _) in enumerate(task.encoded):
            level = 0.0
            for j in task.pre_idx[i]:
                d = dist[j]
                if d == INF:
                    level = INF
                    break
                if d > level:
                    level = d
            if level == INF:
                continue
            via = level + 1.0
            for j in task.add_idx[i]:
                if via < dist[j]:
                    dist[j] = via
                    changed = True
    best = 0.0
    for j in task.goal_idx:
        d = dist[j]
        if d == INF:
            return INF
        if d > best:
            best = d
    return best


def blind(task: _GroundTask, state: int) -> float:
    return 0.0


HEURISTICS: dict[str, Callable[[_GroundTask, int], float]] = {
    "hmax": hmax,
    "blind": blind,
}


def _search(task: _GroundTask, start: int, timeout: float,
            heuristic: Callable[[_GroundTask, int], float]) -> list[GroundAction]:
    deadline = time.monotonic() + timeout
    goal = task.goal_mask

    def unsat(state: int) -> int:
        return (goal & ~state).bit_count()

    h0 = heuristic(task, start)
    if h0 == INF:
        raise PlanningUnsolvable("goal unreachable from the given state")
    g_value: dict[int, int] = {start: 0}
    parent: dict[int, tuple[int, int] | None] = {start: None}
    counter = itertools.count()
    heap: list[tuple[float, int, int, int]] = [(h0, unsat(start), next(counter), start)]
    closed: set[int] = set()
    pops = 0

    while heap:
        pops += 1
        if pops % 128 == 0 and time.monotonic() > deadline:
            raise PlanningTimeout(f"search exceeded {timeout} s")
        _, _, _, state = heapq.heappop(heap)
        if state in closed:
            continue
        closed.add(state)
        if goal & ~state == 0:
            steps: list[GroundAction] = []
            node = state
            while parent[node] is not None:
                node, action_i = parent[node]  # type: ignore[misc]
                steps.append(task.actions[action_i])
            steps.reverse()
            return steps
        g_state = g_value[state]
        for action_i, pre, add, dele in task.encoded:
            if state & pre != pre:
                continue
            succ = (state & ~dele) | add
            if succ in closed:
                continue
            g_succ = g_state + 1
            if g_succ < g_value.get(succ, 1 << 62):
                h = heuristic(task, succ)
                if h == INF:
                    continue
                g_value[succ] = g_succ
                parent[succ] = (state, action_i)
                heapq.heappush(heap, (g_succ + h, unsat(succ), next(counter), succ))
    raise PlanningUnsolvable("search space exhausted without reaching the goal")


def solve_optimal(problem: ProblemModel, domain: DomainModel,
                  timeout: float = DEFAULT_TIMEOUT,
                  heuristic: str | Callable[[_GroundTask, int], float] = "hmax",
                  external_cmd: str | None = None,
                  label: str | None = None) -> Plan:
    """Find a provably optimal (minimum action count) plan.

    Raises :class:`PlanningUnsolvable` or :class:`PlanningTimeout`.  When
    *external_cmd* is set the configured planner command is invoked as
    ``cmd domain.pddl problem.pddl out.plan`` instead of the built-in search.
    """
    if external_cmd:
        return run_external_planner(external_cmd, domain, problem,
                                    timeout=timeout, label=label)
    h = HEURISTICS[heuristic] if isinstance(heuristic, str) else heuristic
    task = _GroundTask(domain, problem)
    actions = _search(task, task.init_mask, timeout, h)
    return Plan(tuple(actions), label=label)


def replan_from(state: State, problem: ProblemModel, domain: DomainModel,
                timeout: float = DEFAULT_TIMEOUT,
                heuristic: str | Callable[[_GroundTask, int], float] = "hmax",
                external_cmd: str | None = None,
                label: str | None = None) -> Plan:
    """Solve the problem again with *state* as the initial state."""
    modified = ProblemModel(
        name=problem.name,
        domain_name=problem.domain_name,
        objects=problem.objects,
        init=frozenset(state),
        goal=problem.goal,
    )
    return solve_optimal(modified, domain, timeout=timeout, heuristic=heuristic,
                         external_cmd=external_cmd, label=label)


def run_external_planner(cmd: str, domain: DomainModel, problem: ProblemModel,
                         timeout: float | None = None,
                         label: str | None = None) -> Plan:
    """Escape hatch: ``{cmd} {domain.pddl} {problem.pddl} {out.plan}``."""
    with tempfile.TemporaryDirectory(prefix="planeval-ext-") as tmp:
        tmp_path = Path(tmp)
        domain_file = tmp_path / "domain.pddl"
        problem_file = tmp_path / "problem.pddl"
        out_file = tmp_path / "out.plan"
        domain_file.write_text(domain_to_pddl(domain), encoding="utf-8")
        problem_file.write_text(problem_to_pddl(problem, domain), encoding="utf-8")
        argv = [*shlex.split(cmd), str(domain_file), str(problem_file), str(out_file)]
        try:
            subprocess.run(argv, check=True, timeout=timeout,
                           capture_output=True, text=True)
        except subprocess.TimeoutExpired as exc:
            raise PlanningTimeout(f"external planner exceeded {timeout} s") from exc
        except subprocess.CalledProcessError as exc:
            raise PlanningUnsolvable(
                f"external planner failed with code {exc.returncode}: {exc.stderr}"
            ) from exc
        if not out_file.exists():
            raise PlanningUnsolvable("external planner produced no plan file")
        text = out_file.read_text(encoding="utf-8")
    return parse_plan(text, domain, problem, label=label)
