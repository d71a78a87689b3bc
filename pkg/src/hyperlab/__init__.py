"""hyperlab: a numerical laboratory for power-indexed orbit frequency.

The package studies how often weighted-shift orbits return to prescribed
neighbourhoods when visit times are read on the polynomial clock n^q, and
carries the surrounding desk apparatus: exact sparse shift algebra, lower
density statistics, explicit construction of frequently returning vectors,
weight-condition checkers, Schatten-norm tooling for conjugation maps
S -> R S T on operator spaces, and multiplication-operator eigenstructure
on weighted Hardy spaces.

Submodules are imported explicitly (`from hyperlab import seqspace`, ...);
nothing heavy is pulled in at package import time.
"""

__version__ = "0.1.0"
