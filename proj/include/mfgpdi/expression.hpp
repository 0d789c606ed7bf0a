#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace mfgpdi {

/// Small arithmetic expression in the variables `x` and `a` (alias `alpha`),
/// used for drift and cost fields of control-set Hamiltonians loaded from JSON.
///
/// Grammar: + - * / ^, unary minus, parentheses, numbers, the constants
/// `pi` and `e`, and the functions sin cos tan exp log sqrt abs tanh
/// sign, plus the binary min(·,·) and max(·,·).
class Expression {
public:
    /// Throws InvalidArgument on a syntax error.
    explicit Expression(std::string_view source);

    [[nodiscard]] double operator()(double x, double a) const;
    [[nodiscard]] const std::string& source() const { return source_; }

    struct Node;

private:
    std::string source_;
    std::shared_ptr<const Node> root_;
};

} // namespace mfgpdi
