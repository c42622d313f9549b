"""Key-rate toolkit for collective attacks on discrete QKD protocols.

Modules: gpauli (shift/clock operators, Bell vectors, MUBs), states
(density-operator utilities and entropies), source (source-replacement
scheme and sifting), keyrate (the generic rate engine), symmetry (groups,
twirling, commutants), families (protocol catalog and attack families),
optimize (worst-case search and thresholds), cli (command-line front end).
"""

__version__ = "0.1.0"
