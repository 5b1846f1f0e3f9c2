#pragma once

// Closed-form smooth functions as immutable expression trees.  Every node
// evaluates pointwise and produces a jet of any order up to the bump tables'
// limit.  Piecewise nodes take a side so one-sided jets at gluing points can
// be compared.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bump.hpp"
#include "chebyshev.hpp"
#include "errors.hpp"
#include "jet.hpp"

namespace qpc {

enum class Side { below = -1, none = 0, above = 1 };

inline Side flip(Side s) { return static_cast<Side>(-static_cast<int>(s)); }

struct FunctionNode {
    virtual ~FunctionNode() = default;
    virtual double eval(double x) const = 0;
    virtual Jet jet(double x0, int K, Side side) const = 0;
    virtual std::string describe() const = 0;
};

class SmoothFunction {
public:
    SmoothFunction() = default;
    explicit SmoothFunction(std::shared_ptr<const FunctionNode> n) : node_(std::move(n)) {}

    double operator()(double x) const { return node_->eval(x); }
    double eval(double x) const { return node_->eval(x); }
    Jet jet(double x0, int K, Side side = Side::none) const { return node_->jet(x0, K, side); }
    std::string describe() const { return node_ ? node_->describe() : "null"; }
    bool valid() const { return static_cast<bool>(node_); }
    const std::shared_ptr<const FunctionNode>& node() const { return node_; }

private:
    std::shared_ptr<const FunctionNode> node_;
};

namespace nodes {

struct Const : FunctionNode {
    double v;
    explicit Const(double value) : v(value) {}
    double eval(double) const override { return v; }
    Jet jet(double x0, int K, Side) const override { return Jet::constant(x0, K, v); }
    std::string describe() const override { return std::to_string(v); }
};

struct Affine : FunctionNode {
    double a, b;
    Affine(double slope, double offset) : a(slope), b(offset) {}
    double eval(double x) const override { return a * x + b; }
    Jet jet(double x0, int K, Side) const override {
        Jet j(x0, K);
        j.c[0] = a * x0 + b;
        if (K >= 1) j.c[1] = a;
        return j;
    }
    std::string describe() const override { return "(" + std::to_string(a) + "*x+" + std::to_string(b) + ")"; }
};

struct Bump : FunctionNode {
    FlatBump f;
    explicit Bump(double nu) : f(nu) {}
    double eval(double x) const override { return f.eval(x); }
    Jet jet(double x0, int K, Side) const override { return f.jet(x0, K); }
    std::string describe() const override { return "flat_bump(" + std::to_string(f.nu()) + ")"; }
};

struct OneSided : FunctionNode {
    OneSidedFlat f;
    explicit OneSided(double p) : f(p) {}
    double eval(double x) const override { return f.eval(x); }
    Jet jet(double x0, int K, Side) const override { return f.jet(x0, K); }
    std::string describe() const override { return "one_sided_flat(" + std::to_string(f.power()) + ")"; }
};

enum class UnaryOp { exp, log, recip, sqrt, sin, cos, arcsin, abs_pow };

struct Unary : FunctionNode {
    UnaryOp op;
    SmoothFunction arg;
    double p;
    Unary(UnaryOp o, SmoothFunction f, double param = 0) : op(o), arg(std::move(f)), p(param) {}

    double eval(double x) const override {
        double u = arg(x);
        switch (op) {
            case UnaryOp::exp: return std::exp(u);
            case UnaryOp::log: return std::log(u);
            case UnaryOp::recip: return 1.0 / u;
            case UnaryOp::sqrt: return std::sqrt(u);
            case UnaryOp::sin: return std::sin(u);
            case UnaryOp::cos: return std::cos(u);
            case UnaryOp::arcsin: return std::asin(u);
            case UnaryOp::abs_pow: return std::pow(std::fabs(u), p);
        }
        return 0;
    }

    Jet jet(double x0, int K, Side side) const override {
        Jet u = arg.jet(x0, K, side);
        switch (op) {
            case UnaryOp::exp: return jet_exp(u);
            case UnaryOp::log: return jet_log(u);
            case UnaryOp::recip: return jet_recip(u);
            case UnaryOp::sqrt: return jet_sqrt(u);
            case UnaryOp::sin: return jet_sin(u);
            case UnaryOp::cos: return jet_cos(u);
            case UnaryOp::arcsin: return jet_arcsin(u);
            case UnaryOp::abs_pow: {
                if (u.c[0] == 0.0) throw DomainViolation("abs_pow: jet at a zero of the argument");
                return jet_pow(u.c[0] < 0 ? jet_scale(u, -1.0) : u, p);
            }
        }
        return u;
    }

    std::string describe() const override {
        static const char* names[] = {"exp", "log", "recip", "sqrt", "sin", "cos", "arcsin", "abs_pow"};
        return std::string(names[static_cast<int>(op)]) + "(" + arg.describe() + ")";
    }
};

struct Sum : FunctionNode {
    SmoothFunction f, g;
    Sum(SmoothFunction a, SmoothFunction b) : f(std::move(a)), g(std::move(b)) {}
    double eval(double x) const override { return f(x) + g(x); }
    Jet jet(double x0, int K, Side s) const override { return jet_add(f.jet(x0, K, s), g.jet(x0, K, s)); }
    std::string describe() const override { return "(" + f.describe() + "+" + g.describe() + ")"; }
};

struct Product : FunctionNode {
    SmoothFunction f, g;
    Product(SmoothFunction a, SmoothFunction b) : f(std::move(a)), g(std::move(b)) {}
    double eval(double x) const override { return f(x) * g(x); }
    Jet jet(double x0, int K, Side s) const override { return jet_mul(f.jet(x0, K, s), g.jet(x0, K, s)); }
    std::string describe() const override { return "(" + f.describe() + "*" + g.describe() + ")"; }
};

struct Scale : FunctionNode {
    double a;
    SmoothFunction f;
    Scale(double s, SmoothFunction g) : a(s), f(std::move(g)) {}
    double eval(double x) const override { return a * f(x); }
    Jet jet(double x0, int K, Side s) const override { return jet_scale(f.jet(x0, K, s), a); }
    std::string describe() const override { return std::to_string(a) + "*" + f.describe(); }
};

// outer(inner(x)); an affine inner function is pulled back directly.
struct Compose : FunctionNode {
    SmoothFunction outer, inner;
    Compose(SmoothFunction o, SmoothFunction i) : outer(std::move(o)), inner(std::move(i)) {}
    double eval(double x) const override { return outer(inner(x)); }
    Jet jet(double x0, int K, Side s) const override {
        if (auto* aff = dynamic_cast<const Affine*>(inner.node().get())) {
            Side os = aff->a > 0 ? s : (aff->a < 0 ? flip(s) : Side::none);
            return jet_affine_pullback(outer.jet(aff->a * x0 + aff->b, K, os), aff->a, x0);
        }
        Jet in = inner.jet(x0, K, s);
        Side os = Side::none;
        if (K >= 1 && in.c[1] != 0.0) os = in.c[1] > 0 ? s : flip(s);
        return jet_compose(outer.jet(in.c[0], K, os), in);
    }
    std::string describe() const override { return outer.describe() + "o" + inner.describe(); }
};

struct Derivative : FunctionNode {
    SmoothFunction f;
    explicit Derivative(SmoothFunction g) : f(std::move(g)) {}
    double eval(double x) const override { return f.jet(x, 1).c[1]; }
    Jet jet(double x0, int K, Side s) const override { return jet_derivative(f.jet(x0, K + 1, s)); }
    std::string describe() const override { return "d(" + f.describe() + ")"; }
};

// piece j on [breaks[j-1], breaks[j]); pieces.size() == breaks.size() + 1
struct Glued : FunctionNode {
    std::vector<double> breaks;
    std::vector<SmoothFunction> pieces;
    Glued(std::vector<double> b, std::vector<SmoothFunction> p) : breaks(std::move(b)), pieces(std::move(p)) {
        if (pieces.size() != breaks.size() + 1) throw PreconditionFailed("glued: need one more piece than breaks");
        if (!std::is_sorted(breaks.begin(), breaks.end())) throw PreconditionFailed("glued: breaks must be sorted");
    }
    std::size_t piece_index(double x, Side s) const {
        auto it = s == Side::below ? std::lower_bound(breaks.begin(), breaks.end(), x)
                                   : std::upper_bound(breaks.begin(), breaks.end(), x);
        return static_cast<std::size_t>(it - breaks.begin());
    }
    double eval(double x) const override { return pieces[piece_index(x, Side::none)](x); }
    Jet jet(double x0, int K, Side s) const override { return pieces[piece_index(x0, s)].jet(x0, K, s); }
    std::string describe() const override {
        std::string out = "glued[";
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            if (i) out += " | " + std::to_string(breaks[i - 1]) + " | ";
            out += pieces[i].describe();
        }
        return out + "]";
    }
};

// base restricted to [lo, lo + period) and extended periodically
struct Periodic : FunctionNode {
    double period, lo;
    SmoothFunction base;
    Periodic(double p, double l, SmoothFunction b) : period(p), lo(l), base(std::move(b)) {}
    double reduce(double x, Side s) const {
        double t = x - lo;
        double r = t - period * std::floor(t / period);
        if (r >= period) r = 0.0;
        if (r == 0.0 && s == Side::below) r = period;
        return lo + r;
    }
    double eval(double x) const override { return base(reduce(x, Side::none)); }
    Jet jet(double x0, int K, Side s) const override {
        Jet j = base.jet(reduce(x0, s), K, s);
        j.x0 = x0;
        return j;
    }
    std::string describe() const override {
        return "periodic(" + std::to_string(period) + "," + std::to_string(lo) + "," + base.describe() + ")";
    }
};

struct Chebyshev : FunctionNode {
    ChebyshevSeries series;
    explicit Chebyshev(ChebyshevSeries s) : series(std::move(s)) {}
    double eval(double x) const override { return series(x); }
    Jet jet(double x0, int K, Side) const override { return series.jet(x0, K); }
    std::string describe() const override { return "chebyshev(" + std::to_string(series.size()) + ")"; }
};

}  // namespace nodes

namespace fn {

inline SmoothFunction constant(double v) { return SmoothFunction(std::make_shared<nodes::Const>(v)); }
inline SmoothFunction affine(double a, double b) { return SmoothFunction(std::make_shared<nodes::Affine>(a, b)); }
inline SmoothFunction identity() { return affine(1.0, 0.0); }
inline SmoothFunction flat_bump(double nu) { return SmoothFunction(std::make_shared<nodes::Bump>(nu)); }
inline SmoothFunction one_sided_flat(double p) { return SmoothFunction(std::make_shared<nodes::OneSided>(p)); }

inline SmoothFunction unary(nodes::UnaryOp op, SmoothFunction f, double p = 0) {
    return SmoothFunction(std::make_shared<nodes::Unary>(op, std::move(f), p));
}
inline SmoothFunction exp(SmoothFunction f) { return unary(nodes::UnaryOp::exp, std::move(f)); }
inline SmoothFunction log(SmoothFunction f) { return unary(nodes::UnaryOp::log, std::move(f)); }
inline SmoothFunction recip(SmoothFunction f) { return unary(nodes::UnaryOp::recip, std::move(f)); }
inline SmoothFunction sqrt(SmoothFunction f) { return unary(nodes::UnaryOp::sqrt, std::move(f)); }
inline SmoothFunction sin(SmoothFunction f) { return unary(nodes::UnaryOp::sin, std::move(f)); }
inline SmoothFunction cos(SmoothFunction f) { return unary(nodes::UnaryOp::cos, std::move(f)); }
inline SmoothFunction arcsin(SmoothFunction f) { return unary(nodes::UnaryOp::arcsin, std::move(f)); }
inline SmoothFunction abs_pow(SmoothFunction f, double p) { return unary(nodes::UnaryOp::abs_pow, std::move(f), p); }

inline SmoothFunction sum(SmoothFunction f, SmoothFunction g) {
    return SmoothFunction(std::make_shared<nodes::Sum>(std::move(f), std::move(g)));
}
inline SmoothFunction product(SmoothFunction f, SmoothFunction g) {
    return SmoothFunction(std::make_shared<nodes::Product>(std::move(f), std::move(g)));
}
inline SmoothFunction scale(double a, SmoothFunction f) {
    return SmoothFunction(std::make_shared<nodes::Scale>(a, std::move(f)));
}
inline SmoothFunction shift(SmoothFunction f, double a) { return sum(std::move(f), constant(a)); }
inline SmoothFunction compose(SmoothFunction outer, SmoothFunction inner) {
    return SmoothFunction(std::make_shared<nodes::Compose>(std::move(outer), std::move(inner)));
}
inline SmoothFunction derivative(SmoothFunction f) {
    return SmoothFunction(std::make_shared<nodes::Derivative>(std::move(f)));
}
inline SmoothFunction glued(std::vector<double> breaks, std::vector<SmoothFunction> pieces) {
    return SmoothFunction(std::make_shared<nodes::Glued>(std::move(breaks), std::move(pieces)));
}
inline SmoothFunction periodic(double period, double lo, SmoothFunction base) {
    return SmoothFunction(std::make_shared<nodes::Periodic>(period, lo, std::move(base)));
}
inline SmoothFunction chebyshev(ChebyshevSeries s) {
    return SmoothFunction(std::make_shared<nodes::Chebyshev>(std::move(s)));
}

}  // namespace fn

}  // namespace qpc
