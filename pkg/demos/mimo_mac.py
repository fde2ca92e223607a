"""
Orthogonal designs on the two-user MIMO channel
===============================================

Each user has Nt antennas and knows the channel phases. Both use the same
rate-one orthogonal design. With complex QAM variables (SOD) the pair keeps
the full sum capacity; with PAM on orthogonal real axes (ROD) it loses a
little capacity but decodes one real symbol at a time and wins on BER.
"""

import numpy as np

from maclab import make_rod, make_sod
from maclab.mimo import ber_simulation, db_to_linear, mac_sum_capacity, stbc_mutual_info

print(make_rod(4).to_text())

n = 50_000
for snr in (0.0, 10.0, 20.0):
    rho = float(db_to_linear(snr))
    line = []
    for Nt in (2, 4, 8):
        full = mac_sum_capacity(Nt, rho, n, seed=1).value
        sod = stbc_mutual_info(make_sod(make_rod(Nt)), rho, "SOD", n, seed=1).value
        rod = stbc_mutual_info(make_rod(Nt), rho, "ROD", n, seed=1).value
        line.append(f"Nt={Nt}: {full:.3f} / {sod:.3f} / {rod:.3f}")
    print(f"{snr:4.1f} dB  sum / SOD / ROD   " + "   ".join(line))

for Nt in (2, 4):
    r = ber_simulation("ROD", Nt, [10.0, 20.0], seed=1)
    s = ber_simulation("SOD", Nt, [10.0, 20.0], seed=1)
    print(f"Nt={Nt} BER at 10, 20 dB   ROD {np.round(r.ber, 5)}   SOD {np.round(s.ber, 5)}")
