"""How long does one latency-critical packet wait at the radio?

Walks the four uplink grant mechanisms across the slot lengths of interest
and prints the worst-case access delay of each, in absolute time and in
slots.  Dynamic scheduling pays a full scheduling-request round trip per
packet, the standing grant pays its period, and grant-free fast uplink
pays four slots flat.
"""

from hapticsched import RadioConfig, SchedulingScheme, haptic_access_delay

TTIS_MS = (0.125, 0.25, 0.5, 1.0)

print(f"{'TTI':>8} | {'DS':>10} {'SPS':>10} {'SRR burst':>10} {'SRR idle':>10} {'FA':>10}")
print("-" * 66)
for tti_ms in TTIS_MS:
    tti = tti_ms * 1e-3
    cfg = RadioConfig(n_channels=10, total_rate=1e6, tti=tti, t_sr=tti, t_pg=10 * tti,
                      haptic_demand_norm=1e-4)
    delays = {
        "DS": haptic_access_delay(SchedulingScheme.DYNAMIC, cfg),
        "SPS": haptic_access_delay(SchedulingScheme.SEMI_PERSISTENT, cfg),
        "SRRb": haptic_access_delay(SchedulingScheme.SOFT_RESERVATION, cfg, in_burst=True),
        "SRRi": haptic_access_delay(SchedulingScheme.SOFT_RESERVATION, cfg, in_burst=False),
        "FA": haptic_access_delay(SchedulingScheme.FAST_UPLINK, cfg),
    }
    cells = " ".join(f"{d * 1e3:7.3f} ms" for d in delays.values())
    print(f"{tti_ms:6.3f} ms | {cells}")

print()
print("In slots the constants are scale-free: DS = 7 slots (SR period = 1 slot),")
print("SPS and SRR-in-burst = 14 slots (grant period = 10 slots), FA = 4 slots.")
print("Fast uplink is the only mechanism that never queues behind a grant cycle.")
