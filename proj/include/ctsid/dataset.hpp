#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace ctsid {

/// Uniformly sampled input/output record. `r` carries the external reference
/// for closed-loop data and is absent for open-loop records.
struct SampledDataset {
    double h = 0.0;
    double t0 = 0.0;
    Eigen::MatrixXd u;                 // N x n_u
    Eigen::MatrixXd y;                 // N x n_y
    std::optional<Eigen::MatrixXd> r;  // N x n_y when present

    Eigen::Index N() const { return u.rows(); }
    Eigen::Index n_u() const { return u.cols(); }
    Eigen::Index n_y() const { return y.cols(); }

    void validate() const;
};

/// CSV with header t,u1..u{n_u},y1..y{n_y}[,r1..r{n_y}] and full-precision values.
void write_dataset_csv(const SampledDataset& ds, const std::string& path);
SampledDataset read_dataset_csv(const std::string& path);

}  // namespace ctsid
