"""Pure-Python batch update kernels.

These are the reference implementations of the three hot loops: plain
tabular Q-learning, the monotonic-mixing joint update, and the switch
controller update. The compiled twins in ``_speedups.pyx`` mirror these
line by line; every arithmetic expression is written in the same order in
both so that the two lanes produce bit-identical float64 results.

Records are processed sequentially in batch order, so repeated keys within
one batch chain their updates exactly like single-record updates would.
"""

BACKEND = "python"


def td_update(q, keys, actions, rewards, next_keys, terminals, lr, gamma):
    """One tabular Q-learning step per record on a (rows x actions) table.

    q[k, a] += lr * (r + gamma * max_a' q[k', a'] - q[k, a]), with the
    bootstrap term dropped on terminal records.
    """
    n = keys.shape[0]
    n_actions = q.shape[1]
    for i in range(n):
        k = keys[i]
        a = actions[i]
        if terminals[i]:
            target = rewards[i]
        else:
            nk = next_keys[i]
            best = q[nk, 0]
            for j in range(1, n_actions):
                if q[nk, j] > best:
                    best = q[nk, j]
            target = rewards[i] + gamma * best
        q[k, a] = q[k, a] + lr * (target - q[k, a])


def switch_update(q, keys, gs, rewards, next_keys, next_allow, terminals,
                  lr, gamma, cost):
    """Q-learning on the binary switch decision with per-activation cost.

    The stored reward is debited by ``cost`` when the record's decision was
    to activate. ``next_allow`` masks the successor's activate action out of
    the bootstrap max (budget exhausted at the successor).
    """
    n = keys.shape[0]
    for i in range(n):
        k = keys[i]
        g = gs[i]
        if g == 1:
            base = rewards[i] - cost
        else:
            base = rewards[i]
        if terminals[i]:
            target = base
        else:
            nk = next_keys[i]
            best = q[nk, 0]
            if next_allow[i] and q[nk, 1] > best:
                best = q[nk, 1]
            target = base + gamma * best
        q[k, g] = q[k, g] + lr * (target - q[k, g])


def mix_update(utilities, action_counts, weights, bias, state_keys, actions,
               rewards, next_state_keys, terminals, lr, gamma,
               y_low, y_high):
    """Normalized squared-error gradient step on the monotonic joint value.

    Q_tot(s, a) = bias[s] + sum_i weights[s, i] * utilities[i, s, a_i].
    The TD target bootstraps through the decomposed greedy max (per-agent
    utility maxima). The gradient of Q_tot in the touched parameters is
    phi = (1, w_i..., u_i...); stepping by lr * e * phi / |phi|^2 moves
    Q_tot itself by exactly lr * e per record, which keeps the bilinear
    u*w coupling from spiraling (a raw gradient step has an effective rate
    that grows with |phi|^2 and diverges). Targets are additionally clamped
    to the environment's value bounds [y_low, y_high]: without a frozen
    target network, bootstrapped max targets on the shared additive
    parameters otherwise inflate without bound. All parameters step
    simultaneously using their pre-update values, then weights are clamped
    at zero. ``actions`` is agent-major: (n_agents, batch).
    """
    n = state_keys.shape[0]
    n_agents = weights.shape[1]
    for i in range(n):
        s = state_keys[i]
        qtot = bias[s]
        for ag in range(n_agents):
            qtot = qtot + weights[s, ag] * utilities[ag, s, actions[ag, i]]
        if terminals[i]:
            y = rewards[i]
        else:
            s2 = next_state_keys[i]
            m = bias[s2]
            for ag in range(n_agents):
                best = utilities[ag, s2, 0]
                for j in range(1, action_counts[ag]):
                    if utilities[ag, s2, j] > best:
                        best = utilities[ag, s2, j]
                m = m + weights[s2, ag] * best
            y = rewards[i] + gamma * m
        if y < y_low:
            y = y_low
        elif y > y_high:
            y = y_high
        sq = 1.0
        for ag in range(n_agents):
            old_u = utilities[ag, s, actions[ag, i]]
            old_w = weights[s, ag]
            sq = sq + old_w * old_w + old_u * old_u
        step = lr * (y - qtot) / sq
        bias[s] = bias[s] + step
        for ag in range(n_agents):
            a = actions[ag, i]
            old_u = utilities[ag, s, a]
            old_w = weights[s, ag]
            utilities[ag, s, a] = old_u + step * old_w
            w = old_w + step * old_u
            if w < 0.0:
                w = 0.0
            weights[s, ag] = w
