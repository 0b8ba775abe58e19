#ifndef HAMFLOW_EXPR_HPP
#define HAMFLOW_EXPR_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hamflow/errors.hpp"

namespace hamflow::expr {

// Chart coordinate layout: index 0 is t, indices 1..n are x1..xn, and
// indices n+1..2n are v1..vn (Velocity) or p1..pn (Momentum). Config
// charts cover extended configuration space and carry only (t, x1..xn).
enum class ChartKind { Velocity, Momentum, Config };

class ChartSpec {
 public:
  ChartSpec(ChartKind kind, int dimension);

  ChartKind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return dimension_; }

  // Number of coordinates: 2n+1 for velocity/momentum charts, n+1 for
  // config charts.
  std::size_t size() const noexcept;

  std::string name_of(std::size_t index) const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::vector<std::string> names() const;

  bool operator==(const ChartSpec&) const = default;

 private:
  ChartKind kind_;
  int dimension_;
};

namespace detail {
struct Node;
}
using NodePtr = std::shared_ptr<const detail::Node>;

// Immutable symbolic scalar function on a chart. Values are shared ASTs;
// copies are cheap and all operations are pure.
class ScalarField {
 public:
  static ScalarField constant(const ChartSpec& chart, double value);
  static ScalarField coordinate(const ChartSpec& chart, std::string_view name);

  const ChartSpec& chart() const noexcept { return chart_; }

  // Evaluates at a full chart point (all coordinates, chart order).
  // Division by zero, ln of a non-positive value and sqrt of a negative
  // value raise Domain errors carrying the offending sub-expression.
  double operator()(std::span<const double> point) const;

  // Exact symbolic partial derivative, lightly simplified.
  ScalarField diff(std::string_view coord) const;
  ScalarField diff_index(std::size_t coord_index) const;

  // Text form that reparses to an evaluation-identical field.
  std::string str() const;

  bool is_constant_zero() const noexcept;
  bool is_constant(double value) const noexcept;
  bool depends_on(std::size_t coord_index) const noexcept;

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a);
  friend ScalarField operator*(double c, const ScalarField& a);
  friend ScalarField pow(const ScalarField& base, double exponent);

 private:
  ScalarField(ChartSpec chart, NodePtr root);

  ChartSpec chart_;
  NodePtr root_;

  friend ScalarField parse(std::string_view, const ChartSpec&);
};

// Parses the expression grammar (+ - * / ^, unary minus, sin cos exp ln
// sqrt, parentheses; ^ is right-associative and requires a constant
// exponent) over the chart's coordinate names.
ScalarField parse(std::string_view source, const ChartSpec& chart);

struct FdCheck {
  double symbolic;
  double numeric;
};

// Central-difference cross check for diff, h = cbrt(eps) * max(1, |c|).
FdCheck fd_check(const ScalarField& f, std::string_view coord,
                 std::span<const double> point);

}  // namespace hamflow::expr

#endif  // HAMFLOW_EXPR_HPP
