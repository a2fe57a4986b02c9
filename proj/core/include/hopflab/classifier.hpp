#pragma once

#include "hopflab/centriole.hpp"
#include "hopflab/clifford.hpp"
#include "hopflab/pathflow.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hopflab::classifier {

// clutching family of the generalized Hopf bundle of a system:
// phi(v) = v_{k+1} I + sum_i v_i j_i sampled on the standard grid
pathflow::MapFamily hopf_clutching(const clifford::CliffordSystem& s, int grid_t = 64);

// recover a system from the values of a linear orthogonal family on the
// standard basis [phi(e_1) .. phi(e_{k+1})]: j_i = phi(e_i) phi(e_{k+1})^T
clifford::CliffordSystem linear_to_module(const std::vector<Matrix>& frame,
                                          double tol = 1e-8);

struct ClassifyOptions {
  int path_segments = 64;       // meridian sampling target (N)
  double tol = 1e-9;            // flow convergence
  int max_sweeps = 5000;
  std::uint64_t seed = 1;
  int workers = 1;
  double membership_tol = 1e-6;  // midpoint membership / recovered relations
  int max_pad_rounds = 3;        // saddle escape budget for the final loop
};

struct StageSummary {
  int meridians = 0;
  int max_sweeps_used = 0;
  double max_deviation = 0.0;
  double max_membership_residual = 0.0;
  double max_odd_angle_residual = 0.0;
  bool align_completed_branch = false;
};

struct Diagnostics {
  std::vector<StageSummary> stages;
  std::vector<double> loop_angles;  // of the halved loop velocity
  int loop_sweeps = 0;
  double loop_energy = 0.0;
  int pad_rounds = 0;
  int padded_n = 0;  // ambient dimension after divisibility/saddle padding
  double recovered_residual = 0.0;
};

struct BundleReport {
  int k = 0;
  int n = 0;  // input fibre dimension
  clifford::ModuleClass cls;
  int trivial_rank = 0;
  clifford::CliffordSystem system;  // recovered on the moving subbundle
  Diagnostics diagnostics;
};

// iterated midpoint pipeline: normalize poles, flow meridians stage by stage
// (aligning poles in-set between stages), fit the final loop, halve its
// velocity, and read the class off the recovered system.  pads and re-flows
// when the loop is stuck above the minimal angles.
BundleReport classify(const pathflow::MapFamily& family,
                      const ClassifyOptions& opts = {});

// human-readable splitting summary of a report
std::string split_report(const BundleReport& report);

}  // namespace hopflab::classifier
