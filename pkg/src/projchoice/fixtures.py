"""Reference type sets used in examples, tests and the verification suite."""

from .core import Params, ProjectSet

ORIGIN = Params(0.0, 0.0)

# agent's favourite (1, 1/2) next to the principal's ideal project
TWO_PROJECTS = ProjectSet.of((1.0, 0.5), (0.0, 1.0))

# agent's favourite already top tier: it is chosen for sure
FAVOURITE_TOP = ProjectSet.of((0.7, 0.83), (0.4, 0.93))

# favourite in the bottom tier: "square" pins the promise, while the full
# proposal lets the principal mix "star" with "triangle"
SQUARE = (0.25, 0.6875)
STAR = (0.16, 0.95)
TRIANGLE = (0.6, 0.214)
FAVOURITE_BOTTOM = ProjectSet.of(SQUARE, STAR, TRIANGLE)
