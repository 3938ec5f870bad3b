"""Shared test utilities: an exhaustive oracle for the second-round
winner/slot distributions."""

from itertools import product

import numpy as np


def enumerate_second_round(n, m, cw_2nd):
    """Exact (p_x_ant, p_k_slot) by enumerating every slot assignment.

    Walks all cw_2nd**(m-1) choices of the m-1 contenders, replays the
    slot scan (a slot chosen by exactly one contender is a success, the
    round stops at n-1 successes or when the slots run out) and tallies
    the granted-antenna count x and the consumed-slot count k.
    Feasible for m <= 6, cw_2nd <= 6.
    """
    if n == 1:
        return np.array([1.0]), np.zeros(0)
    contenders = m - 1
    need = n - 1
    count_x = np.zeros(n + 1)
    count_k = np.zeros(cw_2nd + 1)
    total = cw_2nd ** contenders
    for assignment in product(range(cw_2nd), repeat=contenders):
        occupancy = [0] * cw_2nd
        for slot in assignment:
            occupancy[slot] += 1
        won = 0
        k = cw_2nd
        for slot in range(cw_2nd):
            if occupancy[slot] == 1:
                won += 1
                if won == need:
                    k = slot + 1
                    break
        count_x[1 + won] += 1
        count_k[k] += 1
    return count_x[1:] / total, count_k[1:] / total
