// Streaming JSON emitter for the analysis report.
//
// The report must be byte-identical across runs and across thread counts, so
// the writer fixes everything the standard leaves open: members appear in
// insertion order, numbers are printed with %.17g (lossless for doubles),
// booleans and strings have one spelling, and the layout is a fixed
// two-space indent.  Non-finite numbers are refused with a ValidationError
// naming the offending key — a NaN in a report is a bug upstream, never data.
//
// Usage is push-down: begin_object()/end_object(), begin_array()/end_array(),
// key() then a value inside objects, bare values inside arrays.  str() hands
// back the completed document (trailing newline included) and throws if the
// nesting never closed.
#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "spherefsb/errors.hpp"

namespace spherefsb {

class JsonWriter {
public:
    void begin_object() { open('{', '}'); }
    void begin_array() { open('[', ']'); }

    void end_object() { close(Ctx::object, '}'); }
    void end_array() { close(Ctx::array, ']'); }

    void key(const std::string& name) {
        if (done_) throw ValidationError("json: document already complete");
        if (stack_.empty() || stack_.back().ctx != Ctx::object) {
            throw ValidationError("json: key '" + name + "' outside an object");
        }
        if (pending_key_) {
            throw ValidationError("json: key '" + name + "' follows an unconsumed key '" +
                                  last_key_ + "'");
        }
        if (stack_.back().count > 0) out_ += ',';
        newline_indent(stack_.size());
        out_ += '"';
        append_escaped(out_, name);
        out_ += "\": ";
        pending_key_ = true;
        last_key_ = name;
    }

    void value(double v) {
        if (!std::isfinite(v)) {
            throw ValidationError("json: non-finite number at '" + last_key_ + "'");
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        emit_literal(buf);
    }
    void value(long long v) { emit_literal(std::to_string(v)); }
    void value(int v) { value(static_cast<long long>(v)); }
    void value(bool v) { emit_literal(v ? "true" : "false"); }
    void value(const std::string& v) {
        std::string lit = "\"";
        append_escaped(lit, v);
        lit += '"';
        emit_literal(lit);
    }
    void value(const char* v) { value(std::string(v)); }

    void member(const std::string& k, double v) { key(k); value(v); }
    void member(const std::string& k, long long v) { key(k); value(v); }
    void member(const std::string& k, int v) { key(k); value(v); }
    void member(const std::string& k, bool v) { key(k); value(v); }
    void member(const std::string& k, const std::string& v) { key(k); value(v); }
    void member(const std::string& k, const char* v) { key(k); value(v); }

    // The finished document.  Incomplete nesting is a caller bug.
    const std::string& str() const {
        if (!done_) throw ValidationError("json: document incomplete (unclosed nesting)");
        return out_;
    }

private:
    enum class Ctx { object, array };
    struct Frame {
        Ctx ctx;
        int count = 0;
    };

    void open(char brace, char /*closer*/) {
        pre_value();
        out_ += brace;
        stack_.push_back(Frame{brace == '{' ? Ctx::object : Ctx::array, 0});
    }

    void close(Ctx expect, char brace) {
        if (done_ || stack_.empty() || stack_.back().ctx != expect) {
            throw ValidationError("json: mismatched close near '" + last_key_ + "'");
        }
        if (pending_key_) {
            throw ValidationError("json: key '" + last_key_ + "' has no value");
        }
        const bool empty = stack_.back().count == 0;
        stack_.pop_back();
        if (!empty) newline_indent(stack_.size());
        out_ += brace;
        if (!stack_.empty()) {
            ++stack_.back().count;
        } else {
            out_ += '\n';
            done_ = true;
        }
    }

    // Comma/indent bookkeeping shared by every value form.  Inside an object
    // the key() call has already produced the prefix.
    void pre_value() {
        if (done_) throw ValidationError("json: document already complete");
        if (stack_.empty()) {
            if (root_seen_) throw ValidationError("json: a document has exactly one root");
            root_seen_ = true;
            return;
        }
        Frame& frame = stack_.back();
        if (frame.ctx == Ctx::object) {
            if (!pending_key_) {
                throw ValidationError("json: value without a key inside an object");
            }
            pending_key_ = false;
        } else {
            if (frame.count > 0) out_ += ',';
            newline_indent(stack_.size());
        }
    }

    void emit_literal(const std::string& lit) {
        pre_value();
        out_ += lit;
        if (!stack_.empty()) {
            ++stack_.back().count;
        } else {
            out_ += '\n';
            done_ = true;
        }
    }

    void newline_indent(size_t depth) {
        out_ += '\n';
        out_.append(2 * depth, ' ');
    }

    static void append_escaped(std::string& out, const std::string& s) {
        for (unsigned char c : s) {
            switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
            }
        }
    }

    std::vector<Frame> stack_;
    std::string out_;
    std::string last_key_ = "<root>";
    bool pending_key_ = false;
    bool root_seen_ = false;
    bool done_ = false;
};

} // namespace spherefsb
