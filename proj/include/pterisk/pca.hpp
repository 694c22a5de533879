#pragma once

#include <Eigen/Core>

#include "pterisk/cohort.hpp"

namespace pterisk {

struct PcaModel {
  AspectId aspect = AspectId::kGcs;
  Eigen::VectorXd mean;        // column means of the training matrix (length d)
  Eigen::MatrixXd components;  // k x d, rows orthonormal, descending variance

  Eigen::Index retained() const { return components.rows(); }

  bool operator==(const PcaModel& other) const {
    return aspect == other.aspect && mean == other.mean && components == other.components;
  }
};

// Top singular directions of the centered training matrix. Retains
// min(k, d, n-1, rank); each component is signed so its largest-magnitude
// coordinate is positive (lowest index on ties).
PcaModel fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& train_vectors, int k,
                 AspectId aspect = AspectId::kGcs);

// components * (vector - mean)
Eigen::VectorXd transform_pca(const PcaModel& model,
                              const Eigen::Ref<const Eigen::VectorXd>& vector);

}  // namespace pterisk
