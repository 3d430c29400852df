#pragma once

#include <string>
#include <vector>

namespace cvcouple::arterial {

/// Scalar time signal driving an inlet. Table signals interpolate linearly.
class Waveform {
 public:
  enum class Kind { constant, table, half_sine };

  Waveform() = default;

  static Waveform constant(double value);
  /// Requires strictly increasing t. A periodic table repeats with period t.back() - t.front().
  static Waveform table(std::vector<double> t, std::vector<double> v, bool periodic);
  /// peak * sin(pi t / duration) for t mod period < duration, zero otherwise.
  static Waveform half_sine(double peak, double duration, double period);
  /// Two-column CSV (t_s, value); an optional non-numeric header line is skipped.
  static Waveform from_csv(const std::string& path, bool periodic);

  /// Throws ConfigError past the end of a non-periodic table.
  double operator()(double t) const;
  /// Latest time the signal is defined for (infinity when periodic or analytic).
  double coverage_end() const;

  Kind kind() const { return kind_; }
  bool periodic() const { return periodic_; }
  const std::vector<double>& times() const { return t_; }
  const std::vector<double>& values() const { return v_; }
  double peak() const { return peak_; }
  double duration() const { return duration_; }
  double period() const { return period_; }

 private:
  Kind kind_ = Kind::constant;
  bool periodic_ = false;
  std::vector<double> t_, v_;
  double peak_ = 0.0, duration_ = 0.0, period_ = 0.0;
};

}  // namespace cvcouple::arterial
