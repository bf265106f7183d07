"""grs: grid restoration sequencing toolkit.

Builds and solves repair-set (minimum restoration set) and repair-order
(restoration ordering) problems over DC and SOC power-flow models, then
validates plans against a Newton-Raphson AC redispatch to report true
energy not served.
"""

__version__ = "0.1.0"
