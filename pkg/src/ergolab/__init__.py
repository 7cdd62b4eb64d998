"""Numerical laboratory for smooth ergodic theory on tori and boxes:
Lyapunov spectra, partition entropy rates, empirical measures, curve
reparametrization with calibrated derivative inequalities, and scenario
runners with replayable records."""

__version__ = "0.1.0"
