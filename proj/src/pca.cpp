#include "pterisk/pca.hpp"

#include <Eigen/SVD>

#include "pterisk/errors.hpp"

namespace pterisk {

PcaModel fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& train_vectors, int k, AspectId aspect) {
  const Eigen::Index n = train_vectors.rows();
  const Eigen::Index d = train_vectors.cols();
  if (n < 2) throw DataError("insufficient training data");
  if (d < 1) throw DataError("fit_pca requires at least one feature dimension");
  if (k < 0) throw ConfigError("pca component count must be non-negative");
  if (!train_vectors.allFinite()) throw DataError("fit_pca requires finite inputs");

  PcaModel model;
  model.aspect = aspect;
  model.mean = train_vectors.colwise().mean();
  Eigen::MatrixXd centered = train_vectors.rowwise() - model.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const auto& singular = svd.singularValues();

  Eigen::Index rank = 0;
  const double tol = singular.size() > 0 ? singular(0) * 1e-9 : 0.0;
  for (Eigen::Index i = 0; i < singular.size(); ++i)
    if (singular(i) > tol) ++rank;

  Eigen::Index keep = std::min<Eigen::Index>({static_cast<Eigen::Index>(k), d, n - 1, rank});
  model.components.resize(keep, d);
  for (Eigen::Index i = 0; i < keep; ++i) {
    Eigen::VectorXd comp = svd.matrixV().col(i);
    Eigen::Index arg = 0;
    comp.cwiseAbs().maxCoeff(&arg);
    if (comp(arg) < 0.0) comp = -comp;
    model.components.row(i) = comp.transpose();
  }
  return model;
}

Eigen::VectorXd transform_pca(const PcaModel& model,
                              const Eigen::Ref<const Eigen::VectorXd>& vector) {
  if (vector.size() != model.mean.size())
    throw DataError("transform_pca: vector length " + std::to_string(vector.size()) +
                    " does not match model dimension " + std::to_string(model.mean.size()));
  if (!vector.allFinite()) throw DataError("transform_pca requires finite inputs");
  return model.components * (vector - model.mean);
}

}  // namespace pterisk
