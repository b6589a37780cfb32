"""Yosida-approximant solvers and numerical certificates for nonautonomous
evolution inclusions u'(t) in A(t)u(t) + omega*u(t) + f(t)."""

__version__ = "0.1.0"
