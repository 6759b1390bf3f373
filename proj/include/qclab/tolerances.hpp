#pragma once

namespace qclab {

// Absolute tolerances used by the post-hoc checks. The defaults track the
// accuracy of each layer: exact algebra, AD-exact coframe data, one level of
// finite differences (connection), two levels (curvature).
struct Tolerances {
  double algebra = 1e-12;
  double frame = 1e-10;
  double structure = 1e-8;    // quaternion relations during recovery
  double levi = 1e-9;         // d eta_s(X,Y) = 2 g(I_s X, Y) on H
  double biquard = 1e-9;      // Reeb least-squares residual
  double ill_conditioned = 1e-6;  // smallest singular value of the Reeb system
  double connection = 1e-7;   // metricity, torsion, Q-preservation residuals
  double torsion = 1e-7;      // structural torsion identities
  double u_tensor_n1 = 1e-8;
  double curvature = 1e-6;
  double ricci = 1e-4;
  double alpha = 1e-5;
  double normal = 1e-4;       // normality residual
  double t0 = 1e-5;           // ||T0|| threshold of the normality verdict
  double oracle = 1e-4;
  double cr = 1e-4;
  double levi_invariance = 1e-5;
};

// Finite-difference settings. Central stencils of order 2 or 4.
struct Steps {
  double fd = 1e-3;     // brackets and frame Jacobians
  double curv = 1e-3;   // curvature, d tau and twistor-space differencing
  int order = 4;
};

struct Settings {
  Tolerances tol{};
  Steps steps{};
};

}  // namespace qclab
