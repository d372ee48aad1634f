"""Energy needed to transmit at a secrecy rate, and when it becomes infeasible.

A user can only transmit what the eavesdropper cannot decode: the energy
formula diverges as the payload pushes the rate toward the secrecy limit
log2(h_up / h_eve), and the transmit-power cap bites even earlier. Infeasible
combinations return None and are masked out of every decision.
"""

from slicesim import Action, SimConfig, cpu_energy, tx_energy, utility, MuState

cfg = SimConfig()
h_up = 1e-12          # uplink gain (say, ~340 m from the BS)

print(f"power cap per slot: {cfg.max_tx_energy_j} J")
for h_eve in (1e-14, 1e-13, 5e-13):
    print(f"\nh_up={h_up:.0e}, h_eve={h_eve:.0e} "
          f"(secrecy limit 2^x < {h_up / h_eve:.0f})")
    print("  packets | energy (J)")
    for send in range(0, 11, 2):
        e = tx_energy(Action(1, 0, send), h_up, h_eve, cfg)
        print(f"  {send:7d} | {'INFEASIBLE' if e is None else f'{e:.3e}'}")

print("\nlocal processing: {:.4e} J per task kept on the device".format(
    cpu_energy(1, Action(0, 0, 0), cfg)))

print("\nutility folds queue, drops, and both energies into one score:")
state = MuState(0, 1, 3, 6)
for action, note in ((Action(1, 3, 6), "offload all, drain all"),
                     (Action(1, 0, 6), "keep tasks local, drain all"),
                     (Action(0, 0, 0), "no channel")):
    u = utility(state, action, 4, 1e-11, 1e-14, cfg)
    print(f"  {note:28s} -> {u:.4f}" if u is not None else
          f"  {note:28s} -> infeasible")
