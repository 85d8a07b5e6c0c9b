"""Double-null characteristic evolution of a coupled semilinear wave system,
with closed-form late-time profiles and radiation-zone asymptotics."""

__version__ = "0.1.0"
