#include "mfgpdi/expression.hpp"

#include "mfgpdi/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace mfgpdi {

struct Expression::Node {
    enum class Op { Number, VarX, VarA, Add, Sub, Mul, Div, Pow, Neg, Call };

    Op op = Op::Number;
    double number = 0.0;
    std::string function;
    std::vector<std::shared_ptr<const Node>> args;

    [[nodiscard]] double eval(double x, double a) const
    {
        switch (op) {
        case Op::Number: return number;
        case Op::VarX: return x;
        case Op::VarA: return a;
        case Op::Add: return args[0]->eval(x, a) + args[1]->eval(x, a);
        case Op::Sub: return args[0]->eval(x, a) - args[1]->eval(x, a);
        case Op::Mul: return args[0]->eval(x, a) * args[1]->eval(x, a);
        case Op::Div: return args[0]->eval(x, a) / args[1]->eval(x, a);
        case Op::Pow: return std::pow(args[0]->eval(x, a), args[1]->eval(x, a));
        case Op::Neg: return -args[0]->eval(x, a);
        case Op::Call: return call(x, a);
        }
        return 0.0;
    }

    [[nodiscard]] double call(double x, double a) const
    {
        const double v = args[0]->eval(x, a);
        if (function == "min") return std::min(v, args[1]->eval(x, a));
        if (function == "max") return std::max(v, args[1]->eval(x, a));
        if (function == "sin") return std::sin(v);
        if (function == "cos") return std::cos(v);
        if (function == "tan") return std::tan(v);
        if (function == "exp") return std::exp(v);
        if (function == "log") return std::log(v);
        if (function == "sqrt") return std::sqrt(v);
        if (function == "abs") return std::abs(v);
        if (function == "tanh") return std::tanh(v);
        if (function == "sign") return static_cast<double>((v > 0.0) - (v < 0.0));
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, std::vector<NodePtr> args = {})
{
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->args = std::move(args);
    return n;
}

int arity(const std::string& name)
{
    if (name == "min" || name == "max") return 2;
    for (const char* f : {"sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "sign"}) {
        if (name == f) return 1;
    }
    return 0;
}

// Recursive descent: expr := term (('+'|'-') term)*; term := unary (('*'|'/') unary)*;
// unary := '-' unary | power; power := primary ('^' unary)?
class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse()
    {
        NodePtr n = expr();
        skip();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return n;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const
    {
        throw InvalidArgument("expression '" + std::string(src_) + "': " + what + " at offset " +
                              std::to_string(pos_));
    }

    void skip()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr()
    {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Op::Add, {lhs, term()});
            else if (accept('-')) lhs = make(Op::Sub, {lhs, term()});
            else return lhs;
        }
    }

    NodePtr term()
    {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Op::Mul, {lhs, unary()});
            else if (accept('/')) lhs = make(Op::Div, {lhs, unary()});
            else return lhs;
        }
    }

    NodePtr unary()
    {
        if (accept('-')) return make(Op::Neg, {unary()});
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power()
    {
        NodePtr base = primary();
        if (accept('^')) return make(Op::Pow, {base, unary()});
        return base;
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        if (accept('(')) {
            NodePtr inner = expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number()
    {
        const std::string tail(src_.substr(pos_));
        char* end = nullptr;
        const double v = std::strtod(tail.c_str(), &end);
        if (end == tail.c_str()) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - tail.c_str());
        auto n = std::make_shared<Expression::Node>();
        n->number = v;
        return n;
    }

    NodePtr identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string name(src_.substr(start, pos_ - start));
        if (name == "x") return make(Op::VarX);
        if (name == "a" || name == "alpha") return make(Op::VarA);
        if (name == "pi" || name == "e") {
            auto n = std::make_shared<Expression::Node>();
            n->number = name == "pi" ? std::acos(-1.0) : std::exp(1.0);
            return n;
        }
        const int k = arity(name);
        if (k == 0) fail("unknown identifier '" + name + "'");
        if (!accept('(')) fail("expected '(' after " + name);
        std::vector<NodePtr> args{expr()};
        for (int i = 1; i < k; ++i) {
            if (!accept(',')) fail("expected ',' in call to " + name);
            args.push_back(expr());
        }
        if (!accept(')')) fail("expected ')' closing call to " + name);
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::Call;
        n->function = name;
        n->args = std::move(args);
        return n;
    }
};

} // namespace

Expression::Expression(std::string_view source)
    : source_(source), root_(Parser(source).parse())
{
}

double Expression::operator()(double x, double a) const { return root_->eval(x, a); }

} // namespace mfgpdi
