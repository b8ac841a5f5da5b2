"""Versioned text persistence for planned look-up tables.

Format v1:
    SECRECY-POLICY v1
    <L> <bMaxS> <bMaxD> <M> <gamma>
    planned <count>
    <stateIndex> <actionIndex>     (ascending state index, `count` lines)

Restricted single-battery policies (ITPA/IJPA) write -1 for the battery
dimension of the mains-powered node.
"""

from __future__ import annotations

import numpy as np

from .planner import Policy

MAGIC = "SECRECY-POLICY v1"


class PolicyFormatError(ValueError):
    """Corrupt, truncated, or wrong-version policy file."""


def save_policy(
    policy: Policy,
    path: str,
    levels: int,
    b_s_max: int,
    b_d_max: int,
    n_powers: int,
) -> None:
    planned = (
        policy.planned
        if policy.planned is not None
        else np.flatnonzero(policy.actions >= 0)
    )
    lines = [MAGIC, f"{levels} {b_s_max} {b_d_max} {n_powers} {policy.gamma!r}",
             f"planned {len(planned)}"]
    for s in planned:
        lines.append(f"{int(s)} {int(policy.actions[s])}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_policy(path: str) -> tuple[Policy, tuple[int, int, int, int]]:
    """Returns (policy, (L, bMaxS, bMaxD, M)); -1 marks an absent battery dim."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MAGIC:
        raise PolicyFormatError("not a SECRECY-POLICY v1 file")
    if len(lines) < 3:
        raise PolicyFormatError("truncated header")
    try:
        l_s, bs_s, bd_s, m_s, g_s = lines[1].split()
        levels, b_s_max, b_d_max, n_powers = int(l_s), int(bs_s), int(bd_s), int(m_s)
        gamma = float(g_s)
    except ValueError as exc:
        raise PolicyFormatError(f"bad dimension line: {lines[1]!r}") from exc
    tag, _, count_s = lines[2].partition(" ")
    if tag != "planned":
        raise PolicyFormatError(f"expected 'planned <count>', got {lines[2]!r}")
    try:
        count = int(count_s)
    except ValueError as exc:
        raise PolicyFormatError(f"bad planned count {count_s!r}") from exc

    body = [ln for ln in lines[3:] if ln.strip()]
    if len(body) != count:
        raise PolicyFormatError(f"expected {count} entries, found {len(body)}")

    n_states = levels**4 * (b_s_max + 1 if b_s_max >= 0 else 1) * (
        b_d_max + 1 if b_d_max >= 0 else 1
    )
    actions = np.full(n_states, -1, dtype=np.int64)
    planned = np.empty(count, dtype=np.int64)
    prev = -1
    n_actions = n_powers * n_powers if (b_s_max >= 0 and b_d_max >= 0) else n_powers
    for i, ln in enumerate(body):
        try:
            s_s, a_s = ln.split()
            s, a = int(s_s), int(a_s)
        except ValueError as exc:
            raise PolicyFormatError(f"bad entry line {ln!r}") from exc
        if not 0 <= s < n_states:
            raise PolicyFormatError(f"state index {s} out of range")
        if not 0 <= a < n_actions:
            raise PolicyFormatError(f"action index {a} out of range")
        if s <= prev:
            raise PolicyFormatError("state indices must be strictly ascending")
        prev = s
        actions[s] = a
        planned[i] = s

    full = count == n_states
    return (
        Policy(actions=actions, gamma=gamma, planned=None if full else planned),
        (levels, b_s_max, b_d_max, n_powers),
    )
