#include "records.hpp"

#include "asymerr/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <set>
#include <sstream>

namespace asymerr::cli {

namespace {

const std::set<std::string> kOptionKeys = {"coeff",  "flipped",    "beta_p",     "beta_h",
                                           "kappa", "railway_hl", "railway_hr"};

double number(const std::string& tok, int line, const std::string& what) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != tok.size() || !std::isfinite(v)) throw ParseError(line, what + " '" + tok + "' is not a number");
    return v;
}

// "+1.1" or "1.1" for the upper error, "-0.9" or "0.9" for the lower one
double magnitude(std::string tok, char sign, int line, const std::string& what) {
    if (!tok.empty() && tok[0] == sign) tok.erase(0, 1);
    const double v = number(tok, line, what);
    if (v < 0) throw ParseError(line, what + " must be a magnitude, got '" + tok + "'");
    return v;
}

void validate(MeasurementRecord& r, int line) {
    if (r.kind != "pdf" && r.kind != "lnl") throw ParseError(line, "kind must be pdf or lnl, got '" + r.kind + "'");
    if (r.kind == "pdf" && !parse_pdf_family(r.family))
        throw ParseError(line, "unknown pdf family '" + r.family + "'");
    if (r.kind == "lnl" && !parse_lnl_family(r.family))
        throw ParseError(line, "unknown lnl family '" + r.family + "'");
    for (const auto& [k, v] : r.options)
        if (!kOptionKeys.count(k)) throw ParseError(line, "unknown option '" + k + "'");
    if (auto it = r.options.find("coeff"); it != r.options.end()) {
        r.coefficient = it->second;
        r.options.erase(it);
    }
    if (r.coefficient == 0) throw ParseError(line, "coeff must be nonzero");
    const bool flipped = r.options.count("flipped") > 0;
    if (flipped) {
        const double d = r.options.at("flipped");
        if (d != 1 && d != -1) throw ParseError(line, "flipped must be +1 or -1");
        if (r.kind != "pdf") throw ParseError(line, "flipped applies to pdf records only");
    } else if (!(r.sigma_plus > 0 && r.sigma_minus > 0)) {
        throw ParseError(line, "sigma+ and sigma- must be positive (use flipped=+1|-1 for same-sign shifts)");
    }
    r.line = line;
}

} // namespace

MeasurementRecord parse_record_line(const std::string& text, int line) {
    std::istringstream ss(text);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.size() < 6)
        throw ParseError(line, "expected 'label kind family value +sigma_plus -sigma_minus [k=v ...]'");
    MeasurementRecord r;
    r.label = tok[0];
    r.kind = tok[1];
    r.family = tok[2];
    r.value = number(tok[3], line, "value");
    r.sigma_plus = magnitude(tok[4], '+', line, "sigma+");
    r.sigma_minus = magnitude(tok[5], '-', line, "sigma-");
    for (std::size_t i = 6; i < tok.size(); ++i) {
        if (tok[i] == "opt") continue;
        const auto eq = tok[i].find('=');
        if (eq == std::string::npos || eq == 0) throw ParseError(line, "expected key=value, got '" + tok[i] + "'");
        const auto key = tok[i].substr(0, eq);
        if (r.options.count(key)) throw ParseError(line, "option '" + key + "' given twice");
        r.options[key] = number(tok[i].substr(eq + 1), line, key);
    }
    validate(r, line);
    return r;
}

std::vector<MeasurementRecord> parse_records(std::istream& in, const std::string& format) {
    std::vector<MeasurementRecord> out;
    if (format == "line") {
        int n = 0;
        for (std::string s; std::getline(in, s);) {
            ++n;
            if (auto h = s.find('#'); h != std::string::npos) s.erase(h);
            if (s.find_first_not_of(" \t\r") == std::string::npos) continue;
            out.push_back(parse_record_line(s, n));
        }
        return out;
    }
    if (format != "json") throw ParseError(0, "unknown input format '" + format + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, std::string("bad JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError(0, "JSON input must be an array of records");
    int n = 0;
    for (const auto& j : doc) {
        ++n;
        try {
            MeasurementRecord r;
            r.label = j.value("label", "r" + std::to_string(n));
            r.kind = j.at("kind").get<std::string>();
            r.family = j.at("family").get<std::string>();
            r.value = j.at("value").get<double>();
            r.sigma_plus = j.at("sigma_plus").get<double>();
            r.sigma_minus = j.at("sigma_minus").get<double>();
            if (r.sigma_plus < 0 || r.sigma_minus < 0) throw ParseError(n, "errors must be magnitudes");
            if (j.contains("coeff")) r.options["coeff"] = j.at("coeff").get<double>();
            if (j.contains("options"))
                for (const auto& [k, v] : j.at("options").items()) r.options[k] = v.get<double>();
            validate(r, n);
            out.push_back(r);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(n, std::string("record ") + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

ShapeOptions shape_options(const MeasurementRecord& r) {
    ShapeOptions o;
    if (auto it = r.options.find("beta_p"); it != r.options.end()) {
        if (it->second != std::round(it->second)) throw ParseError(r.line, "beta_p must be an integer");
        o.beta_p = static_cast<int>(it->second);
    }
    if (auto it = r.options.find("beta_h"); it != r.options.end()) o.beta_h = it->second;
    if (auto it = r.options.find("railway_hl"); it != r.options.end()) o.railway_hl = it->second;
    if (auto it = r.options.find("railway_hr"); it != r.options.end()) o.railway_hr = it->second;
    return o;
}

PdfModel to_pdf(const MeasurementRecord& r) {
    const auto f = *parse_pdf_family(r.family);
    const auto o = shape_options(r);
    auto it = r.options.find("flipped");
    if (it == r.options.end()) return pdf_from_quantiles(f, {r.value, r.sigma_plus, r.sigma_minus}, o);
    const int dir = it->second > 0 ? 1 : -1;
    if (f == PdfFamily::Dimidiated) return flipped_to_dimidiated({r.value, r.sigma_plus, r.sigma_minus, dir});
    // both shifts on the same side: R(+1) = value + dir sp, R(-1) = value + dir sm
    return pdf_from_anchors(f, r.value, dir * r.sigma_plus, -dir * r.sigma_minus, o);
}

LnLModel to_lnl(const MeasurementRecord& r) {
    LnLOptions o;
    if (auto it = r.options.find("kappa"); it != r.options.end()) o.kappa = it->second;
    return lnl_from_triple(*parse_lnl_family(r.family), {r.value, r.sigma_plus, r.sigma_minus}, o);
}

} // namespace asymerr::cli
