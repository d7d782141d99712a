#include "weakseg/permutohedral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace weakseg {

namespace {

// Open-addressing hash table mapping fixed-length integer keys to dense
// vertex ids. Keys live in one flat arena (which doubles as the vertex key
// list), so inserts never allocate per key; the blur-closure sweeps insert
// hundreds of thousands of vertices and dominate lattice construction.
class VertexTable {
 public:
  VertexTable(int dim, size_t expected) : d_(dim) {
    size_t cap = 64;
    while (cap < expected * 2) cap <<= 1;
    slots_.assign(cap, -1);
    mask_ = cap - 1;
    keys_.reserve(expected * dim);
  }

  int size() const { return static_cast<int>(keys_.size() / d_); }
  const int* key(int id) const {
    return keys_.data() + static_cast<size_t>(id) * d_;
  }

  // Dense id for `k`, inserting it if absent. `k` must not point into the
  // table's own arena (inserts may reallocate it).
  int find_or_insert(const int* k) {
    size_t pos = hash(k) & mask_;
    while (true) {
      const int32_t s = slots_[pos];
      if (s < 0) {
        const int id = size();
        if (static_cast<size_t>(id + 1) * 2 > slots_.size()) {
          grow();
          return find_or_insert(k);
        }
        keys_.insert(keys_.end(), k, k + d_);
        slots_[pos] = id;
        return id;
      }
      if (std::equal(k, k + d_, key(s))) return s;
      pos = (pos + 1) & mask_;
    }
  }

  int find(const int* k) const {
    size_t pos = hash(k) & mask_;
    while (true) {
      const int32_t s = slots_[pos];
      if (s < 0) return -1;
      if (std::equal(k, k + d_, key(s))) return s;
      pos = (pos + 1) & mask_;
    }
  }

 private:
  uint64_t hash(const int* k) const {
    uint64_t h = 1469598103934665603ULL;
    for (int i = 0; i < d_; ++i) {
      h ^= static_cast<uint32_t>(k[i]);
      h *= 1099511628211ULL;
    }
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return h;
  }

  void grow() {
    const size_t cap = slots_.size() * 2;
    std::vector<int32_t> fresh(cap, -1);
    const size_t mask = cap - 1;
    for (int id = 0; id < size(); ++id) {
      size_t pos = hash(key(id)) & mask;
      while (fresh[pos] >= 0) pos = (pos + 1) & mask;
      fresh[pos] = id;
    }
    slots_.swap(fresh);
    mask_ = mask;
  }

  int d_;
  size_t mask_ = 0;
  std::vector<int32_t> slots_;
  std::vector<int> keys_;
};

constexpr double kPi = 3.14159265358979323846;

// Coefficients of the 1-D blur stencil [1/2, 1, 1/2] applied `passes` times:
// returns c[offset + n] = weight transported n steps, n in [-passes, passes].
std::vector<double> axis_coefficients(int passes) {
  std::vector<double> c = {1.0};
  for (int p = 0; p < passes; ++p) {
    std::vector<double> next(c.size() + 2, 0.0);
    for (size_t i = 0; i < c.size(); ++i) {
      next[i] += 0.5 * c[i];
      next[i + 1] += c[i];
      next[i + 2] += 0.5 * c[i];
    }
    c.swap(next);
  }
  return c;
}

}  // namespace

PermutohedralLattice::PermutohedralLattice(const std::vector<double>& features,
                                           int dim, int count, int passes)
    : n_(count), d_(dim), passes_(passes) {
  if (dim < 1 || count < 1 || passes < 1) {
    throw std::invalid_argument("PermutohedralLattice: bad dimensions");
  }
  if (features.size() != static_cast<size_t>(dim) * count) {
    throw std::invalid_argument("PermutohedralLattice: feature size mismatch");
  }

  offset_.assign(static_cast<size_t>(n_) * (d_ + 1), 0);
  barycentric_.assign(static_cast<size_t>(n_) * (d_ + 1), 0.0);

  // Scale so a unit step in feature space carries unit variance through the
  // whole splat -> blur^passes -> slice pipeline: the blur contributes
  // passes*(d+1)^2/2 per dimension and the two interpolation tents (d+1)^2/6.
  const double inv_std_dev = (d_ + 1) * std::sqrt((3.0 * passes_ + 1.0) / 6.0);
  std::vector<double> scale_factor(d_);
  for (int i = 0; i < d_; ++i) {
    scale_factor[i] = inv_std_dev / std::sqrt(double(i + 1) * (i + 2));
  }

  // Canonical simplex coordinates.
  std::vector<int> canonical((d_ + 1) * (d_ + 1));
  for (int i = 0; i <= d_; ++i) {
    for (int j = 0; j <= d_ - i; ++j) canonical[i * (d_ + 1) + j] = i;
    for (int j = d_ - i + 1; j <= d_; ++j) {
      canonical[i * (d_ + 1) + j] = i - (d_ + 1);
    }
  }

  // Keys are the first d_ lattice coordinates (the last is implied by the
  // zero-sum constraint).
  VertexTable table(d_, static_cast<size_t>(n_) * (d_ + 1));

  std::vector<double> elevated(d_ + 1);
  std::vector<int> rem0(d_ + 1);
  std::vector<int> rank(d_ + 1);
  std::vector<double> barycentric(d_ + 2);
  std::vector<int> key(d_);

  for (int p = 0; p < n_; ++p) {
    const double* f = features.data() + static_cast<size_t>(p) * d_;

    // Elevate onto the hyperplane sum(x) = 0.
    double sm = 0.0;
    for (int j = d_; j > 0; --j) {
      const double cf = f[j - 1] * scale_factor[j - 1];
      elevated[j] = sm - j * cf;
      sm += cf;
    }
    elevated[0] = sm;

    // Round to the nearest remainder-0 lattice point (multiples of d_+1).
    int sum = 0;
    for (int i = 0; i <= d_; ++i) {
      const double v = elevated[i] / (d_ + 1);
      const double up = std::ceil(v) * (d_ + 1);
      const double down = std::floor(v) * (d_ + 1);
      rem0[i] = static_cast<int>((up - elevated[i] < elevated[i] - down) ? up
                                                                         : down);
      sum += rem0[i] / (d_ + 1);
    }

    // Rank of each coordinate of the differential (position in sort order).
    for (int i = 0; i <= d_; ++i) rank[i] = 0;
    for (int i = 0; i < d_; ++i) {
      const double di = elevated[i] - rem0[i];
      for (int j = i + 1; j <= d_; ++j) {
        if (di < elevated[j] - rem0[j]) {
          ++rank[i];
        } else {
          ++rank[j];
        }
      }
    }

    // If the rounded point is off the plane, shift it back.
    for (int i = 0; i <= d_; ++i) {
      rank[i] += sum;
      if (rank[i] < 0) {
        rank[i] += d_ + 1;
        rem0[i] += d_ + 1;
      } else if (rank[i] > d_) {
        rank[i] -= d_ + 1;
        rem0[i] -= d_ + 1;
      }
    }

    // Barycentric coordinates within the enclosing simplex.
    for (int i = 0; i <= d_ + 1; ++i) barycentric[i] = 0.0;
    for (int i = 0; i <= d_; ++i) {
      const double v = (elevated[i] - rem0[i]) / (d_ + 1);
      barycentric[d_ - rank[i]] += v;
      barycentric[d_ - rank[i] + 1] -= v;
    }
    barycentric[0] += 1.0 + barycentric[d_ + 1];

    // Register the d_+1 enclosing vertices.
    for (int remainder = 0; remainder <= d_; ++remainder) {
      for (int i = 0; i < d_; ++i) {
        key[i] = rem0[i] + canonical[remainder * (d_ + 1) + rank[i]];
      }
      offset_[static_cast<size_t>(p) * (d_ + 1) + remainder] =
          table.find_or_insert(key.data());
      barycentric_[static_cast<size_t>(p) * (d_ + 1) + remainder] =
          barycentric[remainder];
    }
  }

  // Close the vertex set under the blur stencil, mirroring the pass schedule,
  // so blurred mass never lands on a missing vertex. The +1 step along axis j
  // adds d_ to coordinate j and subtracts 1 elsewhere (axis d_ subtracts 1
  // from every stored coordinate). Vertices already expanded along an axis in
  // an earlier sweep are skipped: their step targets exist since then.
  std::vector<int> base(d_);
  std::vector<int> shifted(d_);
  std::vector<size_t> expanded_upto(d_ + 1, 0);
  for (int pass = 0; pass < passes_; ++pass) {
    for (int j = 0; j <= d_; ++j) {
      const size_t snapshot = table.size();
      for (size_t i = expanded_upto[j]; i < snapshot; ++i) {
        std::copy_n(table.key(static_cast<int>(i)), d_, base.begin());
        for (int sign : {+1, -1}) {
          for (int c = 0; c < d_; ++c) {
            shifted[c] = base[c] + (c == j ? sign * d_ : -sign);
          }
          table.find_or_insert(shifted.data());
        }
      }
      expanded_upto[j] = snapshot;
    }
  }

  m_ = table.size();

  // Precompute the +/- neighbors of every lattice point along each axis.
  blur_n1_.assign(static_cast<size_t>(d_ + 1) * m_, -1);
  blur_n2_.assign(static_cast<size_t>(d_ + 1) * m_, -1);
  std::vector<int> n1(d_), n2(d_);
  for (int j = 0; j <= d_; ++j) {
    for (int i = 0; i < m_; ++i) {
      const int* k = table.key(i);
      for (int c = 0; c < d_; ++c) {
        n1[c] = k[c] + (c == j ? d_ : -1);
        n2[c] = k[c] - (c == j ? d_ : -1);
      }
      blur_n1_[static_cast<size_t>(j) * m_ + i] = table.find(n1.data());
      blur_n2_[static_cast<size_t>(j) * m_ + i] = table.find(n2.data());
    }
  }

  // Slice scale making the integral response exact: the lattice's response
  // integrated over feature space is 2^(passes*(d+1)) * cell volume, while
  // the unit Gaussian integrates to (2*pi)^(d/2). The A*_d cell volume in
  // feature units is (d+1)^(d-1/2) / inv_std_dev^d.
  alpha_ = std::pow(2.0 * kPi, d_ / 2.0) * std::pow(inv_std_dev, d_) /
           (std::pow(2.0, passes_ * (d_ + 1.0)) *
            std::pow(d_ + 1.0, d_ - 0.5));

  // Exact center-tap response per point. Transport between two vertices of
  // the same simplex whose remainders differ by s is
  //   B(s) = sum_c axis(c)^(d+1-s) * axis(c+1)^s
  // (axis steps split as s coordinates moving one extra step), so the
  // response of point p to itself is alpha * sum_{r,s} b_r b_s B(|r-s|).
  const std::vector<double> axis = axis_coefficients(passes_);
  const int off = passes_;
  std::vector<double> pair_response(d_ + 1, 0.0);
  for (int s = 0; s <= d_; ++s) {
    double total = 0.0;
    for (int c = -passes_; c <= passes_; ++c) {
      const double base = std::pow(axis[off + c], d_ + 1 - s);
      double lifted = 1.0;
      if (s > 0) {
        if (c + 1 > passes_) continue;
        lifted = std::pow(axis[off + c + 1], s);
      }
      total += base * lifted;
    }
    pair_response[s] = total;
  }
  self_.assign(n_, 0.0);
  for (int p = 0; p < n_; ++p) {
    const double* b = barycentric_.data() + static_cast<size_t>(p) * (d_ + 1);
    double acc = 0.0;
    for (int r = 0; r <= d_; ++r) {
      for (int s = 0; s <= d_; ++s) {
        acc += b[r] * b[s] * pair_response[std::abs(r - s)];
      }
    }
    self_[p] = alpha_ * acc;
  }
}

void PermutohedralLattice::compute(const double* in, double* out, int channels,
                                   bool transpose) const {
  if (channels < 1) {
    throw std::invalid_argument("PermutohedralLattice: channels must be >= 1");
  }
  const int vs = channels;
  // Slot 0 is a zero guard for missing blur neighbors.
  std::vector<double> values(static_cast<size_t>(m_ + 1) * vs, 0.0);
  std::vector<double> new_values(static_cast<size_t>(m_ + 1) * vs, 0.0);

  // Splat.
  for (int p = 0; p < n_; ++p) {
    for (int j = 0; j <= d_; ++j) {
      const int o = offset_[static_cast<size_t>(p) * (d_ + 1) + j] + 1;
      const double w = barycentric_[static_cast<size_t>(p) * (d_ + 1) + j];
      const double* src = in + static_cast<size_t>(p) * vs;
      double* dst = values.data() + static_cast<size_t>(o) * vs;
      for (int c = 0; c < vs; ++c) dst[c] += w * src[c];
    }
  }

  // Blur along each lattice direction, `passes_` sweeps; transpose reverses
  // the sub-pass order (each sub-pass is symmetric, so this transposes the
  // composite exactly).
  double* cur = values.data();
  double* next = new_values.data();
  for (int pass = 0; pass < passes_; ++pass) {
    for (int step = 0; step <= d_; ++step) {
      const int j = transpose ? d_ - step : step;
      for (int i = 0; i < m_; ++i) {
        const double* old_val = cur + static_cast<size_t>(i + 1) * vs;
        double* new_val = next + static_cast<size_t>(i + 1) * vs;
        const int o1 = blur_n1_[static_cast<size_t>(j) * m_ + i] + 1;
        const int o2 = blur_n2_[static_cast<size_t>(j) * m_ + i] + 1;
        const double* n1_val = cur + static_cast<size_t>(o1) * vs;
        const double* n2_val = cur + static_cast<size_t>(o2) * vs;
        for (int c = 0; c < vs; ++c) {
          new_val[c] = old_val[c] + 0.5 * (n1_val[c] + n2_val[c]);
        }
      }
      std::swap(cur, next);
    }
  }

  // Slice.
  for (int p = 0; p < n_; ++p) {
    double* dst = out + static_cast<size_t>(p) * vs;
    for (int c = 0; c < vs; ++c) dst[c] = 0.0;
    for (int j = 0; j <= d_; ++j) {
      const int o = offset_[static_cast<size_t>(p) * (d_ + 1) + j] + 1;
      const double w = barycentric_[static_cast<size_t>(p) * (d_ + 1) + j];
      const double* src = cur + static_cast<size_t>(o) * vs;
      for (int c = 0; c < vs; ++c) dst[c] += w * src[c] * alpha_;
    }
  }
}

}  // namespace weakseg
