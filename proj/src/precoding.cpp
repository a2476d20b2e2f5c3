#include "xlmimo/precoding.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace xlmimo {

double gram_rcond_estimate(double trace_gram, double trace_inverse) {
  if (!(trace_gram > 0.0) || !(trace_inverse > 0.0) || !std::isfinite(trace_inverse)) return 0.0;
  return 1.0 / (trace_gram * trace_inverse);
}

namespace {

std::vector<std::size_t> default_ids(std::vector<std::size_t> ids, Eigen::Index n) {
  if (ids.empty()) {
    ids.resize(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), std::size_t{0});
  }
  if (ids.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("user_ids size does not match channel column count");
  }
  return ids;
}

void normalize_columns(CMatrix& f) {
  for (Eigen::Index j = 0; j < f.cols(); ++j) f.col(j) /= f.col(j).norm();
}

}  // namespace

std::optional<PrecoderSet> try_zf_precoders(const CMatrix& channels,
                                            std::vector<std::size_t> user_ids) {
  const Eigen::Index n = channels.cols();
  user_ids = default_ids(std::move(user_ids), n);
  PrecoderSet out;
  out.user_ids = std::move(user_ids);
  if (n == 0) {
    out.columns.resize(channels.rows(), 0);
    return out;
  }
  if (n > channels.rows()) return std::nullopt;

  const CMatrix gram = channels.adjoint() * channels;
  Eigen::LLT<CMatrix> llt(gram);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const CMatrix gram_inv = llt.solve(CMatrix::Identity(n, n));
  const double rcond =
      gram_rcond_estimate(gram.diagonal().real().sum(), gram_inv.diagonal().real().sum());
  if (rcond < kRankTolerance) return std::nullopt;

  out.columns = channels * gram_inv;
  normalize_columns(out.columns);
  return out;
}

PrecoderSet zf_precoders(const CMatrix& channels, std::vector<std::size_t> user_ids) {
  auto result = try_zf_precoders(channels, std::move(user_ids));
  if (!result) {
    throw RankDeficientError("channel stack of " + std::to_string(channels.cols()) +
                             " users is rank deficient");
  }
  return *std::move(result);
}

CVector mrt_precoder(const CVector& channel) {
  const double norm = channel.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("MRT precoder needs a nonzero channel");
  return channel / norm;
}

std::vector<double> effective_gains(const PrecoderSet& precoders, const CMatrix& channels) {
  if (precoders.columns.cols() != channels.cols() ||
      precoders.columns.rows() != channels.rows() ||
      precoders.size() != static_cast<std::size_t>(channels.cols())) {
    throw std::invalid_argument("precoder/channel ordering mismatch");
  }
  std::vector<double> gains(precoders.size());
  for (Eigen::Index k = 0; k < channels.cols(); ++k) {
    gains[static_cast<std::size_t>(k)] = std::norm(precoders.columns.col(k).dot(channels.col(k)));
  }
  return gains;
}

// ---------------------------------------------------------------------------

ZfAccumulator::ZfAccumulator(const CMatrix& channels, std::size_t capacity)
    : channels_(channels) {
  const auto cap = static_cast<Eigen::Index>(
      std::min<std::size_t>(capacity, static_cast<std::size_t>(channels.rows())));
  basis_.resize(channels.rows(), cap);
  chol_inv_.setZero(cap, cap);
  ids_.reserve(static_cast<std::size_t>(cap));
  inv_diag_.reserve(static_cast<std::size_t>(cap));
}

bool ZfAccumulator::try_push(std::size_t user, const CVector* cross) {
  const auto n = static_cast<Eigen::Index>(ids_.size());
  if (n >= basis_.cols()) return false;
  const auto a = channels_.col(static_cast<Eigen::Index>(user));
  const double norm2 = a.squaredNorm();
  if (!(norm2 > 0.0)) return false;

  CVector c;
  if (cross != nullptr) {
    c = cross->head(n);
  } else {
    c = basis_.leftCols(n).adjoint() * a;
  }
  const auto linv = chol_inv_.topLeftCorner(n, n).triangularView<Eigen::Lower>();
  const CVector y = linv * c;  // L y = c
  const double pivot2 = norm2 - y.squaredNorm();
  if (!(pivot2 > kRankTolerance * norm2)) return false;
  const double pivot = std::sqrt(pivot2);

  // New last row of L^{-1}: [-(y^H L^{-1}) / l, 1 / l].
  const Eigen::RowVectorXcd w = -(y.adjoint() * linv) / pivot;
  const double added = w.squaredNorm() + 1.0 / pivot2;
  if (gram_rcond_estimate(trace_gram_ + norm2, trace_inv_ + added) < kRankTolerance) return false;

  basis_.col(n) = a;
  chol_inv_.block(n, 0, 1, n) = w;
  chol_inv_(n, n) = 1.0 / pivot;
  for (Eigen::Index j = 0; j < n; ++j) inv_diag_[static_cast<std::size_t>(j)] += std::norm(w[j]);
  inv_diag_.push_back(1.0 / pivot2);
  trace_gram_ += norm2;
  trace_inv_ += added;
  ids_.push_back(user);
  return true;
}

void ZfAccumulator::pop() {
  if (ids_.empty()) return;
  const auto last = static_cast<Eigen::Index>(ids_.size() - 1);
  for (Eigen::Index j = 0; j < last; ++j) {
    inv_diag_[static_cast<std::size_t>(j)] -= std::norm(chol_inv_(last, j));
  }
  chol_inv_.row(last).setZero();
  trace_gram_ -= basis_.col(last).squaredNorm();
  inv_diag_.pop_back();
  ids_.pop_back();
  trace_inv_ = std::accumulate(inv_diag_.begin(), inv_diag_.end(), 0.0);
}

std::vector<double> ZfAccumulator::gains() const {
  std::vector<double> g(inv_diag_.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = 1.0 / inv_diag_[j];
  return g;
}

double ZfAccumulator::interference_sum(const CVector& cross) const {
  const auto n = static_cast<Eigen::Index>(ids_.size());
  if (n == 0) return 0.0;
  const auto linv = chol_inv_.topLeftCorner(n, n).triangularView<Eigen::Lower>();
  const CVector t = linv * cross.head(n);
  const CVector x = linv.adjoint() * t;  // (G^H G)^{-1} c
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) sum += std::norm(x[j]) / inv_diag_[static_cast<std::size_t>(j)];
  return sum;
}

PrecoderSet ZfAccumulator::precoders() const {
  const auto n = static_cast<Eigen::Index>(ids_.size());
  PrecoderSet out;
  out.user_ids = ids_;
  const auto linv = chol_inv_.topLeftCorner(n, n).triangularView<Eigen::Lower>();
  CMatrix gram_inv = linv.adjoint() * CMatrix(chol_inv_.topLeftCorner(n, n));
  out.columns = basis_.leftCols(n) * gram_inv;
  normalize_columns(out.columns);
  return out;
}

}  // namespace xlmimo
