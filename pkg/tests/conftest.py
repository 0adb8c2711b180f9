from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

from pkahler.exterior import Form, multi_indices
from pkahler.scalar import GaussianRational

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

fractions = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 6))
scalars = st.builds(GaussianRational, fractions, fractions)


@st.composite
def forms(draw, n=3, p=None, q=None, max_terms=4):
    """Random exact form; homogeneous when p and q are fixed."""
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        pp = p if p is not None else draw(st.integers(0, n))
        qq = q if q is not None else draw(st.integers(0, n))
        I = draw(st.sampled_from(multi_indices(n, pp)))
        J = draw(st.sampled_from(multi_indices(n, qq)))
        terms[(I, J)] = draw(scalars)
    return Form(n, terms)
