#pragma once

// Zero-forcing and maximum-ratio precoders.
//
// Convention: channels are columns a_k of G (M x n). The unnormalized ZF
// precoder is G (G^H G)^{-1}, so F^H G = I and f_j^H a_k = 0 for j != k.
// Columns are then scaled to unit norm.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "xlmimo/array_channel.hpp"

namespace xlmimo {

// Sets whose Gram matrix has reciprocal condition estimate below this are
// treated as rank deficient.
inline constexpr double kRankTolerance = 1e-12;

class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PrecoderSet {
  CMatrix columns;                     // M x n, unit-norm columns
  std::vector<std::size_t> user_ids;   // user_ids[j] owns columns.col(j)

  std::size_t size() const { return user_ids.size(); }
};

// Lower bound on the 2-norm reciprocal condition number of a Hermitian
// positive definite Gram matrix from its trace and the trace of its inverse:
// 1 / (tr(A) tr(A^-1)). Monotone non-increasing when columns are appended.
double gram_rcond_estimate(double trace_gram, double trace_inverse);

// Returns std::nullopt when the stack is rank deficient or has more columns
// than rows.
std::optional<PrecoderSet> try_zf_precoders(const CMatrix& channels,
                                            std::vector<std::size_t> user_ids = {});

// Throws RankDeficientError on the same conditions.
PrecoderSet zf_precoders(const CMatrix& channels, std::vector<std::size_t> user_ids = {});

// Unit vector f with |f^H a| = ||a||. Throws std::invalid_argument on a zero channel.
CVector mrt_precoder(const CVector& channel);

// g_k = |f_k^H a_k|^2 with channels.col(k) paired to precoders column k.
std::vector<double> effective_gains(const PrecoderSet& precoders, const CMatrix& channels);

// Incrementally maintained ZF factorization over a growing set of columns
// taken from a fixed channel matrix. Keeps the inverse of the Cholesky factor
// of the Gram matrix and diag((G^H G)^{-1}), so that appending a user costs
// O(M n + n^2) and ZF gains are available without forming the precoders.
class ZfAccumulator {
 public:
  ZfAccumulator(const CMatrix& channels, std::size_t capacity);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::size_t>& ids() const { return ids_; }

  // Appends channel column `user`. Returns false and leaves the state
  // untouched if the enlarged set is rank deficient. `cross` may carry the
  // precomputed inner products a_{ids[j]}^H a_user for j < size().
  bool try_push(std::size_t user, const CVector* cross = nullptr);

  // Removes the most recently pushed user.
  void pop();

  // ZF gains g_j = 1 / [(G^H G)^{-1}]_jj for the current set, in push order.
  std::vector<double> gains() const;

  // sum_j |f_j^H a|^2 for the normalized ZF precoders of the current set,
  // given c = G^H a (length size()).
  double interference_sum(const CVector& cross) const;

  // Explicit normalized ZF precoders of the current set.
  PrecoderSet precoders() const;

 private:
  const CMatrix& channels_;
  std::vector<std::size_t> ids_;
  CMatrix basis_;        // M x capacity, columns of G in push order
  CMatrix chol_inv_;     // capacity x capacity, L^{-1} where G^H G = L L^H
  std::vector<double> inv_diag_;
  double trace_gram_ = 0.0;
  double trace_inv_ = 0.0;
};

}  // namespace xlmimo
