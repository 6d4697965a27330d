"""How tight is the InfoNCE sandwich, and what happens when its hypotheses break?

Part 1 evaluates the lower and upper bounds at the reference parameters and
sweeps the perturbation strength delta. Part 2 builds embedding pairs that
satisfy the positive-pair and negative-pair hypotheses and checks where the
actual loss falls; the last row deliberately weakens the positive pairs.

    python demos/infonce_bounds.py
"""

from dataclasses import replace

import numpy as np

from cgssl.theory import APPENDIX_D, BoundDomainError, bound_params, infonce_bounds, verify_theorem


def main():
    res = infonce_bounds(APPENDIX_D)
    print(f"A={res.A:.4f}  B={res.B:.6f}  eps={res.epsilon:.4f}  eps'={res.epsilon_prime:.5f}")
    print(f"lower={res.lower:.4f}  upper={res.upper:.4f}  gap={res.gap:.4f}\n")

    print("delta   eps      lower    upper    gap")
    for delta in np.round(np.linspace(0.0, 0.5, 6), 2):
        r = infonce_bounds(replace(APPENDIX_D, delta=float(delta)))
        print(f"{delta:5.2f}  {r.epsilon:6.3f}  {r.lower:7.4f}  {r.upper:7.4f}  {r.gap:6.4f}")
    try:
        infonce_bounds(replace(APPENDIX_D, delta=1.0))
    except BoundDomainError as exc:
        print(f"delta=1: {exc}")

    p = bound_params(APPENDIX_D)
    print("\nconstructed embeddings, n=1000, d=4096")
    for seed in range(3):
        c = verify_theorem(1000, 4096, APPENDIX_D.tau, p.epsilon, p.epsilon_prime, seed=seed)
        print(f"  seed {seed}: loss={c.loss:.4f}  within={c.within}  "
              f"min pos cos={c.min_positive_sim:.3f}  max |neg cos|={c.max_negative_sim:.4f}")
    c = verify_theorem(1000, 4096, APPENDIX_D.tau, p.epsilon, p.epsilon_prime, seed=0, violate=True)
    print(f"  weakened positives: loss={c.loss:.4f}  within={c.within}  (upper {c.upper:.4f})")


if __name__ == "__main__":
    main()
