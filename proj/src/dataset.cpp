#include "ctsid/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "ctsid/errors.hpp"

namespace ctsid {

void SampledDataset::validate() const {
    require(h > 0.0, ErrorCode::BAD_INPUT, "nonpositive sampling interval");
    require(u.rows() == y.rows(), ErrorCode::DIM_MISMATCH, "u and y row counts differ");
    require(u.rows() > 0, ErrorCode::BAD_INPUT, "empty record");
    if (r) {
        require(r->rows() == y.rows(), ErrorCode::DIM_MISMATCH, "reference row count");
        require(r->cols() == y.cols(), ErrorCode::DIM_MISMATCH, "reference channel count");
    }
}

void write_dataset_csv(const SampledDataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream f(path);
    require(f.good(), ErrorCode::BAD_INPUT, "cannot open " + path + " for writing");
    f << "t";
    for (Eigen::Index c = 0; c < ds.n_u(); ++c) f << ",u" << (c + 1);
    for (Eigen::Index c = 0; c < ds.n_y(); ++c) f << ",y" << (c + 1);
    if (ds.r)
        for (Eigen::Index c = 0; c < ds.n_y(); ++c) f << ",r" << (c + 1);
    f << "\n";
    f.precision(17);
    for (Eigen::Index k = 0; k < ds.N(); ++k) {
        f << (ds.t0 + static_cast<double>(k) * ds.h);
        for (Eigen::Index c = 0; c < ds.n_u(); ++c) f << "," << ds.u(k, c);
        for (Eigen::Index c = 0; c < ds.n_y(); ++c) f << "," << ds.y(k, c);
        if (ds.r)
            for (Eigen::Index c = 0; c < ds.n_y(); ++c) f << "," << (*ds.r)(k, c);
        f << "\n";
    }
    require(f.good(), ErrorCode::BAD_INPUT, "write to " + path + " failed");
}

SampledDataset read_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), ErrorCode::BAD_INPUT, "cannot open " + path);
    std::string line;
    require(static_cast<bool>(std::getline(f, line)), ErrorCode::BAD_INPUT, "empty file " + path);

    int nu = 0, ny = 0, nr = 0;
    {
        std::stringstream hs(line);
        std::string col;
        bool first = true;
        while (std::getline(hs, col, ',')) {
            if (first) {
                require(col == "t", ErrorCode::BAD_INPUT, "first column must be t");
                first = false;
            } else if (col.rfind("u", 0) == 0) {
                ++nu;
            } else if (col.rfind("y", 0) == 0) {
                ++ny;
            } else if (col.rfind("r", 0) == 0) {
                ++nr;
            } else {
                fail(ErrorCode::BAD_INPUT, "unexpected column " + col);
            }
        }
    }
    require(nu > 0 && ny > 0, ErrorCode::BAD_INPUT, "need at least one input and output column");
    require(nr == 0 || nr == ny, ErrorCode::BAD_INPUT, "reference column count must match outputs");

    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        require(static_cast<int>(row.size()) == 1 + nu + ny + nr, ErrorCode::BAD_INPUT,
                "row with wrong field count in " + path);
        rows.push_back(std::move(row));
    }
    require(rows.size() >= 2, ErrorCode::BAD_INPUT, "record too short");

    SampledDataset ds;
    const Eigen::Index N = static_cast<Eigen::Index>(rows.size());
    ds.t0 = rows[0][0];
    ds.h = rows[1][0] - rows[0][0];
    require(ds.h > 0.0, ErrorCode::BAD_INPUT, "time column not increasing");
    for (size_t k = 1; k + 1 < rows.size(); ++k)
        require(std::abs(rows[k + 1][0] - rows[k][0] - ds.h) < 1e-6 * ds.h, ErrorCode::BAD_INPUT,
                "time column not uniformly sampled");
    ds.u.resize(N, nu);
    ds.y.resize(N, ny);
    if (nr > 0) ds.r = Eigen::MatrixXd(N, nr);
    for (Eigen::Index k = 0; k < N; ++k) {
        const auto& row = rows[static_cast<size_t>(k)];
        for (int c = 0; c < nu; ++c) ds.u(k, c) = row[static_cast<size_t>(1 + c)];
        for (int c = 0; c < ny; ++c) ds.y(k, c) = row[static_cast<size_t>(1 + nu + c)];
        for (int c = 0; c < nr; ++c) (*ds.r)(k, c) = row[static_cast<size_t>(1 + nu + ny + c)];
    }
    ds.validate();
    return ds;
}

}  // namespace ctsid
