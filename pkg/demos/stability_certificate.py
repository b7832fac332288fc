"""Certify negative drift of the quadratic Lyapunov function, and show it fail at k = n."""
from entswitch import lyapunov as L
from entswitch.errors import CertificationFailed
from entswitch.model import SwitchParams


def main():
    for k, n in ((5, 3), (8, 5), (12, 11)):
        cfg = L.LyapunovConfig.from_alpha(n, 0.5 / (n - 1))
        cert = L.certify_negative_drift(SwitchParams(k, n), cfg)
        print(f"k={k} n={n} b={cfg.b:.4f}: drift < 0 outside |x| <= M = {cert.M}")
        for stratum, coef, const, thr in cert.rows():
            print(f"    {stratum:9s} slope {coef:10.5f}  constant {const:10.5f}  threshold {thr:8.2f}")
    try:
        L.certify_negative_drift(SwitchParams(4, 4), L.LyapunovConfig.from_alpha(4, 0.5 / 3))
    except CertificationFailed as exc:
        print(f"k=n=4: {exc}")
    rep = L.instability_conditions(4, 4)
    print(f"k=n=4: interior mean drift {rep.interior_total_drift}, "
          f"boundary drifts {[str(v) for v in rep.boundary_total_drift]}, conditions hold: {rep.conditions_hold}")


if __name__ == "__main__":
    main()
