#include "powerborrow/model_core.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace powerborrow {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::SingularDesign: return "SingularDesign";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::InvalidSummary: return "InvalidSummary";
        case ErrorCode::InvalidHyperparameter: return "InvalidHyperparameter";
        case ErrorCode::InsufficientHistoricalData: return "InsufficientHistoricalData";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::OutsideFeasibleSet: return "OutsideFeasibleSet";
        case ErrorCode::NonpositiveScale: return "NonpositiveScale";
        case ErrorCode::ImproperPosterior: return "ImproperPosterior";
        case ErrorCode::MomentUndefined: return "MomentUndefined";
        case ErrorCode::EmptyDomain: return "EmptyDomain";
        case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
        case ErrorCode::Divergent: return "Divergent";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

SpdFactor::SpdFactor(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error(ErrorCode::NotPositiveDefinite, "matrix must be square and non-empty");
    }
    llt_.compute(m);
    if (llt_.info() != Eigen::Success) {
        throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
    }
    // LLT does not always report failure on a non-positive pivot that rounds to zero.
    const auto diag = llt_.matrixLLT().diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag[i] > 0.0) || !std::isfinite(diag[i])) {
            throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factor has a non-positive pivot");
        }
    }
}

double SpdFactor::logdet() const {
    const auto diag = llt_.matrixLLT().diagonal();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i) acc += std::log(diag[i]);
    return 2.0 * acc;
}

Vector SpdFactor::solve(const Vector& rhs) const { return llt_.solve(rhs); }

Matrix SpdFactor::solve(const Matrix& rhs) const { return llt_.solve(rhs); }

double SpdFactor::inv_quadratic(const Vector& v) const {
    const Vector w = llt_.matrixL().solve(v);
    return w.squaredNorm();
}

double chol_logdet(const Matrix& m) {
    if (!is_symmetric(m, 1e-10)) throw Error(ErrorCode::NotPositiveDefinite, "matrix is not symmetric");
    return SpdFactor(m).logdet();
}

bool is_symmetric(const Matrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

GaussianSuffStats sufficient_stats(const Dataset& data) {
    const auto n = data.x.rows();
    const auto p = data.x.cols();
    if (data.y.size() != n) {
        throw Error(ErrorCode::ShapeMismatch, "Y has " + std::to_string(data.y.size()) +
                                                  " entries but X has " + std::to_string(n) + " rows");
    }
    if (p < 1 || n <= p) {
        throw Error(ErrorCode::SingularDesign,
                    "need n > p (n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
    }
    GaussianSuffStats out;
    out.n = static_cast<long>(n);
    out.p = static_cast<long>(p);
    out.xtx = data.x.transpose() * data.x;
    out.xty = data.x.transpose() * data.y;
    try {
        SpdFactor chol(out.xtx);
        out.beta_hat = chol.solve(out.xty);
    } catch (const Error&) {
        throw Error(ErrorCode::SingularDesign, "X'X is not positive definite");
    }
    out.s = (data.y - data.x * out.beta_hat).squaredNorm();
    return out;
}

GaussianSuffStats stats_from_summary(long n, double ybar, double s_sd) {
    if (n < 2) throw Error(ErrorCode::InvalidSummary, "summary requires n >= 2");
    if (!(s_sd > 0.0) || !std::isfinite(s_sd)) {
        throw Error(ErrorCode::InvalidSummary, "summary requires sd > 0");
    }
    if (!std::isfinite(ybar)) throw Error(ErrorCode::InvalidSummary, "summary mean is not finite");
    GaussianSuffStats out;
    out.n = n;
    out.p = 1;
    out.xtx = Matrix::Constant(1, 1, static_cast<double>(n));
    out.xty = Vector::Constant(1, static_cast<double>(n) * ybar);
    out.beta_hat = Vector::Constant(1, ybar);
    out.s = static_cast<double>(n - 1) * s_sd * s_sd;
    return out;
}

GaussianSuffStats pool_stats(const GaussianSuffStats& a, const GaussianSuffStats& b) {
    if (a.p != b.p) throw Error(ErrorCode::ShapeMismatch, "pooled datasets differ in p");
    GaussianSuffStats out;
    out.n = a.n + b.n;
    out.p = a.p;
    out.xtx = a.xtx + b.xtx;
    out.xty = a.xty + b.xty;
    SpdFactor chol(out.xtx);
    out.beta_hat = chol.solve(out.xty);
    out.s = std::max(0.0, a.yty() + b.yty() - out.beta_hat.dot(out.xty));
    return out;
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n\"");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\"");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_number(const std::string& cell, std::size_t line_no) {
    if (cell.empty()) throw Error(ErrorCode::ParseError, "empty cell on line " + std::to_string(line_no));
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, "bad number '" + cell + "' on line " + std::to_string(line_no));
    }
    return v;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text) {
    std::stringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (!trim(line).empty()) {
            header = split_row(line);
            break;
        }
    }
    if (header.empty()) throw Error(ErrorCode::ParseError, "missing header row");

    long y_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "y") {
            if (y_col >= 0) throw Error(ErrorCode::ParseError, "duplicate 'y' column");
            y_col = static_cast<long>(j);
        }
    }
    if (y_col < 0) throw Error(ErrorCode::ParseError, "no response column named 'y'");
    const std::size_t width = header.size();
    if (width < 2) throw Error(ErrorCode::ParseError, "need at least one covariate column");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_row(line);
        if (cells.size() != width) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + " has " +
                                                   std::to_string(cells.size()) + " cells, expected " +
                                                   std::to_string(width));
        }
        std::vector<double> values(width);
        for (std::size_t j = 0; j < width; ++j) values[j] = parse_number(cells[j], line_no);
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw Error(ErrorCode::ParseError, "no data rows");

    Dataset data;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(width - 1);
    data.x.resize(n, p);
    data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index col = 0;
        for (std::size_t j = 0; j < width; ++j) {
            if (static_cast<long>(j) == y_col) {
                data.y[i] = rows[i][j];
            } else {
                data.x(i, col++) = rows[i][j];
            }
        }
    }
    return data;
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_dataset_csv(buf.str());
}

}  // namespace powerborrow
