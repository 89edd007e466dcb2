#pragma once

#include <complex>
#include <span>
#include <vector>

namespace clm {

/// Finite sum of terms c t^m e^{a t}.
///
/// Canonical form: terms sorted by (rate, power), equal (power, rate) pairs
/// merged, exact zero coefficients dropped.
class ExpPolySum {
public:
  struct Term {
    std::complex<double> coeff;
    int power = 0;
    double rate = 0.0;
  };

  ExpPolySum() = default;
  static ExpPolySum exponential(double rate, std::complex<double> coeff = 1.0);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  std::complex<double> operator()(double t) const;

  ExpPolySum& operator+=(const ExpPolySum& other);
  ExpPolySum& operator*=(std::complex<double> factor);

  /// t -> \int_0^t e^{a (t-s)} value(s) ds, term by term in closed form.
  /// A term whose rate equals `a` gains one power of t.
  ExpPolySum convolve(double a) const;

  double max_rate() const;

private:
  void add_term(Term term);
  void canonicalize();

  std::vector<Term> terms_;
};

ExpPolySum operator+(ExpPolySum a, const ExpPolySum& b);
ExpPolySum operator*(std::complex<double> factor, ExpPolySum a);

/// Divided difference of x -> e^{t x} over `nodes`, i.e.
/// E[r](t) = e^{r t} and E[S + a](t) = \int_0^t e^{a (t-s)} E[S](s) ds.
/// Repeated nodes give the polynomial factors of confluent rates.
double exp_divided_difference(std::span<const double> nodes, double t);

/// (e^{a t} - e^{b t}) / (a - b), and t e^{a t} when a == b.
double exp_difference(double a, double b, double t);

/// Finite sum of terms c E[r_0, ..., r_p](t).
///
/// This is the form the hierarchy produces naturally: each level convolves
/// the level below with one more exponential. Evaluating the divided
/// differences directly stays accurate for nearly equal rates, where the
/// expanded t^m e^{a t} form cancels catastrophically.
class ExpChainSum {
public:
  struct Term {
    std::complex<double> coeff;
    std::vector<double> nodes;  // sorted ascending
  };

  ExpChainSum() = default;
  static ExpChainSum exponential(double rate, std::complex<double> coeff = 1.0);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  std::complex<double> operator()(double t) const;

  /// Adds factor * other.
  void add(const ExpChainSum& other, std::complex<double> factor = 1.0);

  ExpChainSum convolve(double a) const;

  /// Same function in t^m e^{a t} form.
  ExpPolySum expanded() const;

private:
  void add_term(Term term);

  std::vector<Term> terms_;
};

}  // namespace clm
