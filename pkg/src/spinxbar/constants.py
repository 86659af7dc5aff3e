"""Physical constants (SI) and unit helpers."""
from scipy import constants as _c

Q_E = _c.e
HBAR = _c.hbar
K_B = _c.k

OE_PER_TESLA = 1.0e4
# 1 emu/cm^3 = 1e3 A/m ; 1 erg/cm^3 = 0.1 J/m^3
EMU_CM3_TO_A_M = 1.0e3
ERG_CM3_TO_J_M3 = 0.1

NM = 1e-9
UA = 1e-6
FF = 1e-15
