#include "mar/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mar {

bool Date::is_leap(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int Date::days_in_month(int year, int month) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) throw ValidationError("bad month");
    if (month == 2 && is_leap(year)) return 29;
    return lengths[month - 1];
}

std::int64_t Date::serial() const {
    // Days-from-civil (Howard Hinnant's algorithm).
    int y = year;
    const int m = month;
    const int d = day;
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date Date::add_months(int n) const {
    const int total = (year * 12 + (month - 1)) + n;
    int y = total / 12;
    int m = total % 12;
    if (m < 0) {
        m += 12;
        y -= 1;
    }
    Date out{y, m + 1, day};
    out.day = std::min(out.day, days_in_month(out.year, out.month));
    return out;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::parse(const std::string& iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        throw ParseError("date not in YYYY-MM-DD form: '" + iso + "'");
    for (std::size_t i = 0; i < iso.size(); ++i) {
        if (i == 4 || i == 7) continue;
        if (!std::isdigit(static_cast<unsigned char>(iso[i])))
            throw ParseError("date not in YYYY-MM-DD form: '" + iso + "'");
    }
    Date d{std::stoi(iso.substr(0, 4)), std::stoi(iso.substr(5, 2)), std::stoi(iso.substr(8, 2))};
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        throw ParseError("invalid calendar date: '" + iso + "'");
    return d;
}

void TimeSeries::validate() const {
    if (timestamps.size() != values.size())
        throw ValidationError("time series: timestamp/value length mismatch");
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (!(timestamps[i - 1] < timestamps[i]))
            throw ValidationError("time series: timestamps not strictly increasing at " +
                                  timestamps[i].to_string());
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError("time series: non-finite value");
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // Trim surrounding whitespace and CR.
        auto b = field.find_first_not_of(" \t\r");
        auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

TimeSeries load_csv(const std::string& path, const std::string& date_col,
                    const std::string& value_col) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);

    std::string line;
    std::size_t lineno = 0;
    // Header (first non-comment line).
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) throw ParseError(path + ": no header row");

    auto find_col = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw ParseError(path + ": column '" + name + "' not found in header");
    };
    const int di = find_col(date_col);
    const int vi = find_col(value_col);

    std::vector<std::pair<Date, double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) <= std::max(di, vi))
            throw ParseError(path + ":" + std::to_string(lineno) + ": too few fields");
        Date d;
        try {
            d = Date::parse(fields[static_cast<std::size_t>(di)]);
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        double v;
        std::size_t consumed = 0;
        const std::string& raw = fields[static_cast<std::size_t>(vi)];
        try {
            v = std::stod(raw, &consumed);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad value '" + raw + "'");
        }
        if (consumed != raw.size())
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad value '" + raw + "'");
        if (!std::isfinite(v))
            throw ParseError(path + ":" + std::to_string(lineno) + ": non-finite value");
        rows.emplace_back(d, v);
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first == rows[i - 1].first)
            throw ValidationError(path + ": duplicate date " + rows[i].first.to_string());
    }

    TimeSeries ts;
    ts.label = path;
    ts.timestamps.reserve(rows.size());
    ts.values.reserve(rows.size());
    for (const auto& [d, v] : rows) {
        ts.timestamps.push_back(d);
        ts.values.push_back(v);
    }
    ts.validate();
    return ts;
}

void save_csv(const TimeSeries& ts, const std::string& path, const std::string& manifest_ref) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path);
    if (!manifest_ref.empty()) out << "# manifest: " << manifest_ref << "\n";
    out << "date,value\n";
    char buf[40];
    for (std::size_t i = 0; i < ts.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", ts.values[i]);
        out << ts.timestamps[i].to_string() << ',' << buf << '\n';
    }
}

TimeSeries resample_monthly_last(const TimeSeries& ts) {
    ts.validate();
    TimeSeries out;
    out.label = ts.label;
    if (ts.empty()) return out;

    auto month_key = [](const Date& d) { return d.year * 12 + (d.month - 1); };
    std::size_t i = 0;
    int expected = month_key(ts.timestamps.front());
    while (i < ts.size()) {
        const int key = month_key(ts.timestamps[i]);
        if (key != expected) {
            const int y = expected / 12, m = expected % 12 + 1;
            char buf[8];
            std::snprintf(buf, sizeof(buf), "%04d-%02d", y, m);
            throw ValidationError("resample_monthly_last: no observations in month " +
                                  std::string(buf));
        }
        // Last observation within this month.
        std::size_t j = i;
        while (j + 1 < ts.size() && month_key(ts.timestamps[j + 1]) == key) ++j;
        out.timestamps.push_back(ts.timestamps[j]);
        out.values.push_back(ts.values[j]);
        i = j + 1;
        ++expected;
    }
    return out;
}

TimeSeries rolling_variance(const TimeSeries& ts, int window) {
    ts.validate();
    if (window < 2) throw ValidationError("rolling_variance: window must be >= 2");
    const int n = static_cast<int>(ts.size());
    if (window > n) throw ValidationError("rolling_variance: window exceeds series length");
    TimeSeries out;
    out.label = ts.label;
    out.timestamps.reserve(static_cast<std::size_t>(n - window + 1));
    out.values.reserve(static_cast<std::size_t>(n - window + 1));
    for (int i = 0; i + window <= n; ++i) {
        double m = 0;
        for (int k = 0; k < window; ++k) m += ts.values[static_cast<std::size_t>(i + k)];
        m /= window;
        double ss = 0;
        for (int k = 0; k < window; ++k) {
            const double d = ts.values[static_cast<std::size_t>(i + k)] - m;
            ss += d * d;
        }
        out.timestamps.push_back(ts.timestamps[static_cast<std::size_t>(i + window - 1)]);
        out.values.push_back(ss / (window - 1));
    }
    return out;
}

SummaryStats summary(const TimeSeries& ts) {
    ts.validate();
    const std::size_t n = ts.size();
    if (n < 2) throw ValidationError("summary: need at least 2 observations");
    SummaryStats s;
    s.n = n;
    s.min = *std::min_element(ts.values.begin(), ts.values.end());
    s.max = *std::max_element(ts.values.begin(), ts.values.end());
    double m = 0;
    for (double v : ts.values) m += v;
    m /= static_cast<double>(n);
    s.mean = m;
    double m2 = 0, m3 = 0, m4 = 0, ss = 0;
    for (double v : ts.values) {
        const double d = v - m;
        ss += d * d;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    s.sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (m2 > 0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    } else {
        s.skewness = std::nan("");
        s.excess_kurtosis = std::nan("");
    }
    return s;
}

}  // namespace mar
