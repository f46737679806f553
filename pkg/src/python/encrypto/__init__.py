"""
Encrypto: a deterministic simulator for Extended Encrypto_Random secure multi-party computation.

Parties cut their private blocks into packets, mask them with functions drawn blindly from a pool,
and shuffle the packets among themselves until nobody can tell where a packet came from. A TTP
picked at run time out of m candidates decrypts, reassembles and announces the aggregate.
"""

__version__ = "0.1.0"
