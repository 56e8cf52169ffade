#pragma once
#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gamacro/number.hpp"

namespace gamacro {

// Bit i set means basis vector i is a factor; factors are kept in ascending order.
using BladeId = std::uint32_t;
using Matrix = std::vector<std::vector<Number>>;

inline int grade(BladeId b) { return std::popcount(b); }

// Sign of reordering the concatenated factor lists of a and b into ascending order.
inline int reorder_sign(BladeId a, BladeId b) {
  int swaps = 0;
  for (a >>= 1; a != 0; a >>= 1) swaps += std::popcount(a & b);
  return (swaps & 1) ? -1 : 1;
}

struct BladeTerm {
  BladeId blade = 0;
  Number coef;
};

// Geometric product of two basis blades in a diagonal metric; coef may be zero.
BladeTerm orthogonal_gp(BladeId a, BladeId b, const std::vector<Number>& diag);

enum class ProductKind { gp, op, sp, lcp, rcp, fdp, hip, cp, acp };
inline constexpr std::array<ProductKind, 9> kAllProducts = {
    ProductKind::gp,  ProductKind::op,  ProductKind::sp, ProductKind::lcp, ProductKind::rcp,
    ProductKind::fdp, ProductKind::hip, ProductKind::cp, ProductKind::acp};
const char* product_name(ProductKind k);
std::optional<ProductKind> parse_product(const std::string& s);

// True if grade gr of the gp of grades (ga, gb) survives in product k (not cp/acp).
bool keeps_grade(ProductKind k, int ga, int gb, int gr);

// Blade images of the linear map whose column j is the image of basis vector j.
template <class T>
std::vector<std::map<BladeId, T>> outermorphism_images(const std::vector<std::vector<T>>& m, int n_src,
                                                       int n_dst) {
  std::vector<std::map<BladeId, T>> img(std::size_t{1} << n_src);
  img[0][0] = T(1);
  for (BladeId b = 1; b < (BladeId{1} << n_src); ++b) {
    int i = std::countr_zero(b);
    const auto& rest = img[b ^ (BladeId{1} << i)];
    auto& out = img[b];
    for (int k = 0; k < n_dst; ++k) {
      const T& v = m[k][i];
      if (v == T(0)) continue;
      BladeId bk = BladeId{1} << k;
      for (const auto& [c, x] : rest) {
        if (c & bk) continue;
        T term = v * x;
        if (reorder_sign(bk, c) < 0) term = -term;
        out[c | bk] += term;
      }
    }
    for (auto it = out.begin(); it != out.end();) {
      if (it->second == T(0)) it = out.erase(it);
      else ++it;
    }
  }
  return img;
}

class Frame {
public:
  static constexpr int kMaxDim = 12;
  static constexpr int kMaxNonOrthogonalDim = 8;

  // Throws NonSymmetricIPM, FrameTooLarge.
  static std::shared_ptr<const Frame> from_ipm(std::string name, std::vector<std::string> basis, Matrix ipm);
  static std::shared_ptr<const Frame> euclidean(std::string name, std::vector<std::string> basis);

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  BladeId blade_count() const { return BladeId{1} << dim(); }
  const std::vector<std::string>& basis() const { return basis_; }
  const Matrix& ipm() const { return ipm_; }
  bool diagonal() const { return diagonal_; }
  // Signature of the internal orthogonal frame (+1, 0, -1 per vector).
  const std::vector<int>& signature() const { return signature_; }
  // Columns are the internal orthogonal basis vectors on the declared basis.
  const std::vector<std::vector<double>>& bcm() const { return bcm_; }

  // Nonzero terms of product k on basis blades a and b, written into out.
  void terms(ProductKind k, BladeId a, BladeId b, std::vector<BladeTerm>& out) const;

  std::string blade_name(BladeId b) const;  // "1", "e1", "e1^e2"
  // Throws UnknownBlade or NonCanonicalBlade.
  BladeId parse_blade(const std::string& s) const;
  std::optional<int> basis_index(const std::string& name) const;

  // Column k holds the reciprocal vector e^k on the declared basis. Throws DegenerateMetric.
  std::vector<std::vector<double>> reciprocal_frame() const;

private:
  Frame() = default;
  void gp_terms(BladeId a, BladeId b, std::vector<BladeTerm>& out) const;
  void build_tables();

  std::string name_;
  std::vector<std::string> basis_;
  Matrix ipm_;
  bool diagonal_ = true;
  std::vector<Number> diag_;
  std::vector<int> signature_;
  std::vector<std::vector<double>> bcm_;
  std::vector<std::vector<BladeTerm>> gp_;  // non-diagonal frames only, index a << n | b
};

using FramePtr = std::shared_ptr<const Frame>;

}  // namespace gamacro
