from gl3twist import tau


def test_tau_known_values():
    t = tau.tau_series(12)
    assert t[1:8] == [1, -24, 252, -1472, 4830, -6048, -16744]


def test_tau_oracles_agree():
    N = 300
    assert tau.tau_series(N)[1:N + 1] == tau.tau_product_oracle(N)[1:N + 1]
    assert tau.tau_series(N)[1:N + 1] == tau.tau_eisenstein_oracle(N)[1:N + 1]


def test_tau_multiplicative():
    t = tau.tau_series(400)
    assert t[6] == t[2] * t[3]
    assert t[4] == t[2] ** 2 - 2**11
    assert t[391] == t[17] * t[23]
