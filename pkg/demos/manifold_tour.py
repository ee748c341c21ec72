"""A short tour of the manifold operators.

Normalizes a small matrix onto unit columns, projects a direction onto
the tangent space, walks the rotating axis schedule, and measures a few
geodesic distances.  Everything is printed, nothing is plotted.
"""

import numpy as np

from manolab import (
    ManifoldSchedule,
    dim_inner,
    dim_norm,
    geodesic_oblique,
    geodesic_sphere,
    oblique_normalize,
    rotation_axis,
    sinkhorn_normalize,
    tangent_project,
)


def main() -> None:
    rng = np.random.default_rng(0)
    theta = rng.standard_normal((4, 3))

    print("parameter:")
    print(np.round(theta, 3))

    theta_hat = oblique_normalize(theta, axis=0)
    print("\ncolumn norms after normalization:", dim_norm(theta_hat, 0).values)

    direction = rng.standard_normal((4, 3))
    tangent = tangent_project(direction, theta_hat, axis=0)
    residue = dim_inner(tangent, theta_hat, 0).values
    print("per-column <tangent, theta_hat> (should be ~0):")
    print(residue)

    schedule = ManifoldSchedule()
    axes = [rotation_axis(schedule, t) for t in range(6)]
    print("\nrotating schedule reduces axes:", axes)

    other = oblique_normalize(rng.standard_normal((4, 3)), axis=0)
    print("\noblique distance to a random point:",
          round(geodesic_oblique(theta_hat, other, 0), 4))
    print("sphere distance (whole matrix as one vector):",
          round(geodesic_sphere(theta_hat, other), 4))

    positive = np.abs(rng.standard_normal((3, 3))) + 0.1
    doubly = sinkhorn_normalize(positive, iterations=50)
    print("\nafter 50 Sinkhorn iterations:")
    print("row sums   ", np.round(doubly.sum(axis=1), 6))
    print("column sums", np.round(doubly.sum(axis=0), 6))


if __name__ == "__main__":
    main()
