#pragma once

// Text output: CSV with 17 significant digits and JSON documents for the
// diagram, classification and kappa_max results.

#include <iosfwd>
#include <string>
#include <vector>

#include "rubberroll/bifurcation.hpp"
#include "rubberroll/reconstruct.hpp"

namespace rubberroll {

/// Shortest form that still carries 17 significant digits ("%.17g").
std::string format_number(double v);

inline constexpr const char* kTrajectoryHeader = "t,theta,p_theta,psi,phi,x_c,y_c,z_c,x_p,y_p,E_drift,F1_drift";

void write_trajectory_csv(std::ostream& os, const AbsoluteTrajectory& tr);

struct RotationRow {
  double kappa = 0.0;
  double eps = 0.0;
  double N = 0.0;
  double N_err = 0.0;
};

void write_rotation_csv(std::ostream& os, const std::vector<RotationRow>& rows);

/// Header "n,kappa,eps,N"; one block per resonance order.
void write_resonance_csv(std::ostream& os, int n, const std::vector<ResonancePoint>& pts, bool header = true);

std::string diagram_json(const BifurcationDiagram& d);

/// Schema problems of a diagram document, empty when it is well formed.
std::vector<std::string> check_diagram_json(const std::string& text);

std::string classification_json(double kappa, double eps, int branch, const Params& p, const Classification& c);

std::string kappa_max_json(const Params& p, const std::optional<KappaMax>& k);

}  // namespace rubberroll
