#include <relalg/dform.hpp>
#include <relalg/expr.hpp>

#include <cctype>
#include <memory>
#include <variant>

namespace relalg {

namespace {

enum class Tok { End, Ident, Int, Plus, Minus, Star, Slash, DblStar, Caret, LParen, RParen };

struct Token {
    Tok kind;
    std::string text;
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : s_(text) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' ||
                                    s_[pos_] == '\r')) {
            if (s_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= s_.size()) {
            tok_.kind = Tok::End;
            tok_.text.clear();
            return;
        }
        char c = s_[pos_];
        auto single = [&](Tok k) {
            tok_.kind = k;
            tok_.text = std::string(1, c);
            ++pos_;
            ++col_;
        };
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
                ++pos_;
                ++col_;
            }
            tok_.kind = Tok::Ident;
            tok_.text = s_.substr(start, pos_ - start);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
                ++col_;
            }
            tok_.kind = Tok::Int;
            tok_.text = s_.substr(start, pos_ - start);
        } else if (c == '*') {
            if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '*') {
                tok_.kind = Tok::DblStar;
                tok_.text = "**";
                pos_ += 2;
                col_ += 2;
            } else {
                single(Tok::Star);
            }
        } else if (c == '+') {
            single(Tok::Plus);
        } else if (c == '-') {
            single(Tok::Minus);
        } else if (c == '/') {
            single(Tok::Slash);
        } else if (c == '^') {
            single(Tok::Caret);
        } else if (c == '(') {
            single(Tok::LParen);
        } else if (c == ')') {
            single(Tok::RParen);
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
        }
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

struct Node {
    enum Kind { Num, Var, Call, Unary, Binary } kind;
    Rat value;
    std::string name; // variable or function name
    char op = 0;      // '+','-','*','/','p' (power), '^'
    std::unique_ptr<Node> lhs, rhs;
    int line = 1, col = 1;
};

using NodePtr = std::unique_ptr<Node>;

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) {}

    NodePtr parse() {
        NodePtr n = parse_bp(0);
        if (lex_.peek().kind != Tok::End)
            throw ParseError("unexpected trailing input '" + lex_.peek().text + "'",
                             lex_.peek().line, lex_.peek().col);
        return n;
    }

private:
    static int left_bp(Tok t) {
        switch (t) {
        case Tok::Plus:
        case Tok::Minus: return 10;
        case Tok::Star:
        case Tok::Slash: return 20;
        case Tok::Caret: return 24;
        case Tok::DblStar: return 30;
        default: return -1;
        }
    }

    NodePtr parse_bp(int min_bp) {
        NodePtr lhs = parse_primary();
        while (true) {
            Tok k = lex_.peek().kind;
            int bp = left_bp(k);
            if (bp < min_bp || bp < 0) break;
            Token op = lex_.take();
            // '**' is right-associative, the rest left-associative
            int next_bp = (k == Tok::DblStar) ? bp : bp + 1;
            NodePtr rhs = parse_bp(next_bp);
            auto n = std::make_unique<Node>();
            n->kind = Node::Binary;
            n->op = k == Tok::Plus    ? '+'
                    : k == Tok::Minus ? '-'
                    : k == Tok::Star  ? '*'
                    : k == Tok::Slash ? '/'
                    : k == Tok::Caret ? '^'
                                      : 'p';
            n->line = op.line;
            n->col = op.col;
            n->lhs = std::move(lhs);
            n->rhs = std::move(rhs);
            lhs = std::move(n);
        }
        return lhs;
    }

    NodePtr parse_primary() {
        Token t = lex_.take();
        switch (t.kind) {
        case Tok::Int: {
            auto n = std::make_unique<Node>();
            n->kind = Node::Num;
            n->value = Rat(t.text);
            n->line = t.line;
            n->col = t.col;
            return n;
        }
        case Tok::Ident: {
            if (lex_.peek().kind == Tok::LParen) {
                if (t.text != "sin" && t.text != "cos" && t.text != "exp")
                    throw ParseError("unknown function '" + t.text + "'", t.line, t.col);
                lex_.take(); // (
                NodePtr arg = parse_bp(0);
                if (lex_.peek().kind != Tok::RParen)
                    throw ParseError("expected ')'", lex_.peek().line, lex_.peek().col);
                lex_.take();
                auto n = std::make_unique<Node>();
                n->kind = Node::Call;
                n->name = t.text;
                n->lhs = std::move(arg);
                n->line = t.line;
                n->col = t.col;
                return n;
            }
            auto n = std::make_unique<Node>();
            n->kind = Node::Var;
            n->name = t.text;
            n->line = t.line;
            n->col = t.col;
            return n;
        }
        case Tok::Minus: {
            auto n = std::make_unique<Node>();
            n->kind = Node::Unary;
            n->op = '-';
            n->line = t.line;
            n->col = t.col;
            n->lhs = parse_bp(26);
            return n;
        }
        case Tok::LParen: {
            NodePtr inner = parse_bp(0);
            if (lex_.peek().kind != Tok::RParen)
                throw ParseError("expected ')'", lex_.peek().line, lex_.peek().col);
            lex_.take();
            return inner;
        }
        default:
            throw ParseError("unexpected token '" + t.text + "'", t.line, t.col);
        }
    }

    Lexer lex_;
};

long integer_exponent(const Node& n) {
    if (n.kind == Node::Num && is_integer(n.value) && n.value >= 0)
        return n.value.get_num().get_si();
    if (n.kind == Node::Unary)
        throw ParseError("exponent must be a non-negative integer", n.line, n.col);
    throw ParseError("exponent must be a non-negative integer", n.line, n.col);
}

Expr eval_scalar(const Node& n, const VarTable& vars) {
    switch (n.kind) {
    case Node::Num: return Expr::constant(n.value);
    case Node::Var:
        if (!vars.contains(n.name))
            throw ParseError("unknown identifier '" + n.name + "'", n.line, n.col);
        return Expr::variable(n.name);
    case Node::Call: {
        Expr arg = eval_scalar(*n.lhs, vars);
        if (n.name == "sin") return Expr::sin_of(arg);
        if (n.name == "cos") return Expr::cos_of(arg);
        return Expr::exp_of(arg);
    }
    case Node::Unary: return -eval_scalar(*n.lhs, vars);
    case Node::Binary: {
        if (n.op == 'p') {
            Expr base = eval_scalar(*n.lhs, vars);
            return base.pow(integer_exponent(*n.rhs));
        }
        if (n.op == '^')
            throw ParseError("wedge '^' is not allowed in scalar expressions", n.line, n.col);
        Expr a = eval_scalar(*n.lhs, vars);
        Expr b = eval_scalar(*n.rhs, vars);
        switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        default:
            if (b.is_zero_structural())
                throw ParseError("division by zero", n.line, n.col);
            return a / b;
        }
    }
    }
    throw ParseError("malformed expression", n.line, n.col);
}

struct FormValue {
    bool is_form = false;
    Expr scalar;
    DForm form;
};

FormValue eval_form(const Node& n, const std::vector<std::string>& frame,
                    const VarTable& vars) {
    int rank = static_cast<int>(frame.size());
    auto as_form = [&](const FormValue& v) {
        return v.is_form ? v.form : DForm::scalar(rank, v.scalar);
    };
    switch (n.kind) {
    case Node::Num: return {false, Expr::constant(n.value), {}};
    case Node::Var: {
        for (std::size_t i = 0; i < frame.size(); ++i)
            if (frame[i] == n.name) return {true, Expr(), DForm::theta(rank, static_cast<int>(i) + 1)};
        if (!vars.contains(n.name))
            throw ParseError("unknown identifier '" + n.name + "'", n.line, n.col);
        return {false, Expr::variable(n.name), {}};
    }
    case Node::Call: {
        FormValue arg = eval_form(*n.lhs, frame, vars);
        if (arg.is_form)
            throw ParseError("function applied to a form", n.line, n.col);
        if (n.name == "sin") return {false, Expr::sin_of(arg.scalar), {}};
        if (n.name == "cos") return {false, Expr::cos_of(arg.scalar), {}};
        return {false, Expr::exp_of(arg.scalar), {}};
    }
    case Node::Unary: {
        FormValue v = eval_form(*n.lhs, frame, vars);
        if (v.is_form) return {true, Expr(), -v.form};
        return {false, -v.scalar, {}};
    }
    case Node::Binary: {
        if (n.op == 'p') {
            FormValue base = eval_form(*n.lhs, frame, vars);
            if (base.is_form)
                throw ParseError("'**' applies to scalars only", n.line, n.col);
            return {false, base.scalar.pow(integer_exponent(*n.rhs)), {}};
        }
        FormValue a = eval_form(*n.lhs, frame, vars);
        FormValue b = eval_form(*n.rhs, frame, vars);
        switch (n.op) {
        case '^': {
            DForm fa = as_form(a), fb = as_form(b);
            try {
                return {true, Expr(), fa.wedge(fb)};
            } catch (const StructureError& e) {
                throw ParseError(e.what(), n.line, n.col);
            }
        }
        case '*': {
            if (a.is_form && b.is_form)
                throw ParseError("use '^' to wedge forms", n.line, n.col);
            if (a.is_form) return {true, Expr(), a.form.scaled(b.scalar)};
            if (b.is_form) return {true, Expr(), b.form.scaled(a.scalar)};
            return {false, a.scalar * b.scalar, {}};
        }
        case '/': {
            if (b.is_form) throw ParseError("division by a form", n.line, n.col);
            if (b.scalar.is_zero_structural())
                throw ParseError("division by zero", n.line, n.col);
            if (a.is_form) return {true, Expr(), a.form.scaled(Expr::constant(1) / b.scalar)};
            return {false, a.scalar / b.scalar, {}};
        }
        case '+':
        case '-': {
            if (!a.is_form && !b.is_form)
                return {false, n.op == '+' ? a.scalar + b.scalar : a.scalar - b.scalar, {}};
            DForm fa = as_form(a), fb = as_form(b);
            try {
                return {true, Expr(), n.op == '+' ? fa + fb : fa - fb};
            } catch (const StructureError& e) {
                throw ParseError(e.what(), n.line, n.col);
            }
        }
        }
        break;
    }
    }
    throw ParseError("malformed expression", n.line, n.col);
}

} // namespace

Expr parse_expr(const std::string& text, const VarTable& vars) {
    Parser p(text);
    NodePtr root = p.parse();
    return eval_scalar(*root, vars);
}

DForm parse_form(const std::string& text, const std::vector<std::string>& frame_names,
                 const VarTable& vars) {
    Parser p(text);
    NodePtr root = p.parse();
    FormValue v = eval_form(*root, frame_names, vars);
    if (v.is_form) return v.form;
    return DForm::scalar(static_cast<int>(frame_names.size()), v.scalar);
}

} // namespace relalg
