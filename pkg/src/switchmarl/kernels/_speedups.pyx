# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch update kernels.

Line-by-line twins of ``fallback.py``: identical arithmetic in identical
order on float64, so results are bit-identical to the pure-Python lane
(the build disables fused multiply-add for this reason).
"""

BACKEND = "compiled"


def td_update(double[:, ::1] q, long long[::1] keys, long long[::1] actions,
              double[::1] rewards, long long[::1] next_keys,
              unsigned char[::1] terminals, double lr, double gamma):
    cdef Py_ssize_t n = keys.shape[0]
    cdef Py_ssize_t n_actions = q.shape[1]
    cdef Py_ssize_t i, j
    cdef long long k, a, nk
    cdef double target, best
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


def switch_update(double[:, ::1] q, long long[::1] keys, long long[::1] gs,
                  double[::1] rewards, long long[::1] next_keys,
                  unsigned char[::1] next_allow, unsigned char[::1] terminals,
                  double lr, double gamma, double cost):
    cdef Py_ssize_t n = keys.shape[0]
    cdef Py_ssize_t i
    cdef long long k, g, nk
    cdef double base, target, best
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


def mix_update(double[:, :, ::1] utilities, long long[::1] action_counts,
               double[:, ::1] weights, double[::1] bias,
               long long[::1] state_keys, long long[:, ::1] actions,
               double[::1] rewards, long long[::1] next_state_keys,
               unsigned char[::1] terminals, double lr, double gamma,
               double y_low, double y_high):
    cdef Py_ssize_t n = state_keys.shape[0]
    cdef Py_ssize_t n_agents = weights.shape[1]
    cdef Py_ssize_t i, ag
    cdef long long s, s2, a, j
    cdef double qtot, y, m, best, sq, step, old_u, old_w, w
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
