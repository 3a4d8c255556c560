// ISCAS bench reader and writer.
//
//   file   := (comment | input | output | assign)*
//   input  := "INPUT" "(" id ")"
//   output := "OUTPUT" "(" id ")"
//   assign := id "=" KIND "(" id ("," id)* ")"
//
// Statements are not line-delimited; whitespace is insignificant and `#`
// comments run to end of line.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "setsim/netlist.hpp"

namespace setsim {

namespace {

enum class Tok { Ident, LParen, RParen, Comma, Equals, End };

struct Token {
    Tok kind;
    std::string_view text;
    SourceLocation loc;
};

bool is_ident_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != ',' && c != '=' &&
           c != '#';
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_space_and_comments();
        SourceLocation loc{line_, col_};
        if (pos_ >= text_.size()) return {Tok::End, {}, loc};
        char c = text_[pos_];
        auto single = [&](Tok kind) {
            advance();
            return Token{kind, text_.substr(pos_ - 1, 1), loc};
        };
        switch (c) {
            case '(': return single(Tok::LParen);
            case ')': return single(Tok::RParen);
            case ',': return single(Tok::Comma);
            case '=': return single(Tok::Equals);
            default: break;
        }
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) advance();
        return {Tok::Ident, text_.substr(start, pos_ - start), loc};
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + std::string(t.text) + "'";
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::toupper(static_cast<unsigned char>(a[i])) != std::toupper(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

class Parser {
public:
    Parser(std::string_view text, std::string name) : lex_(text), circuit_(std::move(name)) { shift(); }

    Circuit run() {
        while (cur_.kind != Tok::End) statement();
        return std::move(circuit_);
    }

private:
    void shift() { cur_ = lex_.next(); }

    Token expect(Tok kind, const char* what) {
        if (cur_.kind != kind) throw ParseError(std::string("expected ") + what + ", found " + describe(cur_), cur_.loc);
        Token t = cur_;
        shift();
        return t;
    }

    void statement() {
        Token head = expect(Tok::Ident, "identifier");
        if (cur_.kind == Tok::LParen && (iequals(head.text, "INPUT") || iequals(head.text, "OUTPUT"))) {
            shift();
            Token id = expect(Tok::Ident, "net name");
            expect(Tok::RParen, "')'");
            NetId n = circuit_.net(id.text);
            if (iequals(head.text, "INPUT"))
                circuit_.add_input(n, head.loc);
            else
                circuit_.add_output(n, head.loc);
            return;
        }
        expect(Tok::Equals, "'='");
        Token kind = expect(Tok::Ident, "gate kind");
        expect(Tok::LParen, "'('");
        std::vector<NetId> args;
        if (cur_.kind != Tok::RParen) {
            args.push_back(circuit_.net(expect(Tok::Ident, "net name").text));
            while (cur_.kind == Tok::Comma) {
                shift();
                args.push_back(circuit_.net(expect(Tok::Ident, "net name").text));
            }
        }
        expect(Tok::RParen, "')'");
        NetId out = circuit_.net(head.text);
        if (iequals(kind.text, "DFF")) {
            if (args.size() != 1) throw ParseError("DFF takes exactly one input", kind.loc);
            circuit_.add_flop(args[0], out, head.loc);
            return;
        }
        auto gk = gate_kind_from_string(kind.text);
        if (!gk) throw ParseError("unknown gate kind '" + std::string(kind.text) + "'", kind.loc);
        circuit_.add_gate(*gk, std::move(args), out, head.loc);
    }

    Lexer lex_;
    Token cur_{};
    Circuit circuit_;
};

}  // namespace

Circuit parse_bench_unchecked(std::string_view text, std::string name) {
    return Parser(text, std::move(name)).run();
}

Circuit parse_bench(std::string_view text, std::string name) {
    Circuit c = parse_bench_unchecked(text, std::move(name));
    for (const Diagnostic& d : validate(c).errors)
        if (d.code == "duplicate-driver" || d.code == "undeclared-net") throw ParseError(d.message, d.location);
    return c;
}

Circuit load_bench_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("E_IO", "cannot open bench file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_bench(ss.str(), std::filesystem::path(path).stem().string());
    } catch (const ParseError& e) {
        throw Error(ErrorKind::input, e.code(), path + ":" + e.what());
    }
}

std::string to_bench(const Circuit& c) {
    std::ostringstream os;
    if (!c.name().empty()) os << "# " << c.name() << "\n";
    os << "# " << c.primary_inputs().size() << " inputs, " << c.primary_outputs().size() << " outputs, "
       << c.flops().size() << " flops, " << c.gates().size() << " gates\n\n";
    for (NetId n : c.primary_inputs()) os << "INPUT(" << c.net_name(n) << ")\n";
    for (NetId n : c.primary_outputs()) os << "OUTPUT(" << c.net_name(n) << ")\n";
    os << "\n";
    for (const Flop& f : c.flops()) os << c.net_name(f.output) << " = DFF(" << c.net_name(f.data) << ")\n";
    for (const Gate& g : c.gates()) {
        os << c.net_name(g.output) << " = " << to_string(g.kind) << "(";
        for (std::size_t i = 0; i < g.inputs.size(); ++i) os << (i ? ", " : "") << c.net_name(g.inputs[i]);
        os << ")\n";
    }
    return os.str();
}

}  // namespace setsim
