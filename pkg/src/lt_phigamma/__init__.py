"""lt-phigamma: exact Lubin-Tate (phi, Gamma)-modules and strata combinatorics."""

from loguru import logger

logger.disable("lt_phigamma")
