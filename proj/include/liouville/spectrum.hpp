#pragma once

#include <sstream>
#include <vector>

#include "errors.hpp"

namespace liouville {

// The constants a_0 > a_1 > ... > a_n > 0.
class AxisSpectrum {
 public:
  AxisSpectrum() = default;
  explicit AxisSpectrum(std::vector<double> a) : a_(std::move(a)) { validate(); }

  int n() const { return int(a_.size()) - 1; }
  double operator[](int k) const { return a_[k]; }
  const std::vector<double>& values() const { return a_; }
  double width() const { return a_.front() - a_.back(); }

  // Copy with a_k removed (the spectrum of the hypersurface N_k seen intrinsically).
  AxisSpectrum without(int k) const {
    std::vector<double> b;
    for (int j = 0; j <= n(); ++j)
      if (j != k) b.push_back(a_[j]);
    return AxisSpectrum(b);
  }

 private:
  void validate() const {
    if (a_.size() < 3) throw InputError("spectrum needs n >= 2, i.e. at least 3 constants");
    for (std::size_t k = 0; k + 1 < a_.size(); ++k) {
      if (!(a_[k] > a_[k + 1])) {
        std::ostringstream os;
        os << "spectrum not strictly decreasing: a" << k << " = " << a_[k] << ", a" << k + 1
           << " = " << a_[k + 1];
        throw InputError(os.str());
      }
    }
    if (!(a_.back() > 0.0)) throw InputError("spectrum needs a_n > 0");
  }

  std::vector<double> a_;
};

}  // namespace liouville
