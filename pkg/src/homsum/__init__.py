"""homsum: exact combinatorial moment engine for homogeneous sums,
orthogonal polynomials, Gauss quadrature and random-discriminant moments,
plus a seeded Monte Carlo layer."""

__version__ = "0.1.0"
