"""Shared fixtures: deterministic random MMSE problem instances."""

from rbdmimo.channel import ChannelScenario, generate_channel
from rbdmimo.detectors import MmseProblem, preprocess
from rbdmimo.rngstream import complex_normal, mix_seed, uniform_stream


def make_problem(m, seed, n=None, sigma2=0.5) -> MmseProblem:
    """Random SPD detection problem from a random channel draw."""
    n = 4 * m if n is None else n
    h = generate_channel(n, m, ChannelScenario(), mix_seed(seed, 0)).H
    y = complex_normal(uniform_stream(mix_seed(seed, 1)), n)
    return preprocess(h, y, sigma2)


def problem_batch(count, seed, m_range=(2, 16), n_factor_range=(2, 16), sigma2_range=(0.01, 1.0)):
    """Iterate `count` problems with randomized shape and noise level."""
    gen = uniform_stream(seed)
    for i in range(count):
        m = int(gen.integers(m_range[0], m_range[1] + 1))
        n = m * int(gen.integers(n_factor_range[0], n_factor_range[1] + 1))
        sigma2 = float(gen.uniform(*sigma2_range))
        yield make_problem(m, mix_seed(seed, i), n=n, sigma2=sigma2)
