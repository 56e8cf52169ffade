#pragma once
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace gamacro::oracle {

// Dense double-valued reference algebra built straight from a bilinear form.
// Shares no code with the symbolic product tables.
class NumFrame {
public:
  static constexpr int kMaxDim = 8;
  // Throws std::invalid_argument for n > 8 or a non-square form.
  explicit NumFrame(std::vector<std::vector<double>> form);
  int dim() const { return n_; }
  std::uint32_t size() const { return 1u << n_; }
  const std::vector<std::vector<double>>& form() const { return form_; }
  // Geometric product of basis blades as a dense coefficient vector.
  const std::vector<std::pair<std::uint32_t, double>>& gp(std::uint32_t a, std::uint32_t b) const {
    return table_[(std::size_t{a} << n_) | b];
  }

private:
  int n_;
  std::vector<std::vector<double>> form_;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> table_;
};

using NumFramePtr = std::shared_ptr<const NumFrame>;

enum class Product { gp, op, sp, lcp, rcp, fdp, hip, cp, acp };

class NumMultivector {
public:
  explicit NumMultivector(NumFramePtr f) : f_(std::move(f)), c_(f_->size(), 0.0) {}
  const NumFramePtr& frame() const { return f_; }
  double& operator[](std::uint32_t b) { return c_[b]; }
  double operator[](std::uint32_t b) const { return c_[b]; }
  const std::vector<double>& coefs() const { return c_; }
  double max_abs() const;

private:
  NumFramePtr f_;
  std::vector<double> c_;
};

int bit_count(std::uint32_t b);

NumMultivector product(Product k, const NumMultivector& a, const NumMultivector& b);
NumMultivector operator+(const NumMultivector& a, const NumMultivector& b);
NumMultivector operator-(const NumMultivector& a, const NumMultivector& b);
NumMultivector operator*(double s, const NumMultivector& a);
NumMultivector reverse(const NumMultivector& a);
NumMultivector grade_involution(const NumMultivector& a);
NumMultivector clifford_conjugate(const NumMultivector& a);
NumMultivector grade_part(const NumMultivector& a, int k);
double quasi_norm2(const NumMultivector& a);
// Throws std::domain_error("NullVersor") when |quasi-norm| < 1e-14.
NumMultivector versor_inverse(const NumMultivector& a);

}  // namespace gamacro::oracle
