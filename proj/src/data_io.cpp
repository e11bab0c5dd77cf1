#include "evcharge/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "evcharge/errors.hpp"
#include "evcharge/rng.hpp"

namespace evc {

namespace {

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw config_error("bad numeric value for '" + key + "': " + v);
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw config_error("bad integer value for '" + key + "': " + v);
    }
}

// RFC-4180 field split: quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

// ISO-8601 date-time or raw epoch seconds.
std::int64_t parse_timestamp(const std::string& raw, long row) {
    const std::string s = trim(raw);
    int y, mo, d, h = 0, mi = 0, se = 0;
    char sep;
    if (std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &se) >= 6)
        return days_from_civil(y, mo, d) * 86400LL + h * 3600LL + mi * 60LL + se;
    try {
        std::size_t pos = 0;
        const double e = std::stod(s, &pos);
        if (pos == s.size()) return static_cast<std::int64_t>(std::llround(e));
    } catch (const std::exception&) {
    }
    throw ingest_error("unparseable timestamp '" + s + "'", row);
}

double series_max(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

} // namespace

// ---------------------------------------------------------------------------
// ScenarioConfig
// ---------------------------------------------------------------------------

const std::vector<std::string>& algorithm_names() {
    static const std::vector<std::string> names{"proposed", "occma", "ocsa_f", "ocsa_n", "edf"};
    return names;
}

bool is_known_algorithm(const std::string& name) {
    const auto& n = algorithm_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

void ScenarioConfig::validate() const {
    if (n_evs < 1) throw config_error("n_evs must be >= 1");
    if (n_stations < 1) throw config_error("n_stations must be >= 1");
    if (!(peak_kw > 0.0)) throw config_error("peak_kw must be > 0");
    if (!(charging_efficiency > 0.0 && charging_efficiency <= 1.0))
        throw config_error("charging_efficiency must be in (0,1]");
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("alpha must be in (0,1)");
    if (!(v_charg_init > 0.0)) throw config_error("v_charg_init must be > 0");
    if (v_dead < 0.0) throw config_error("v_dead must be >= 0");
    if (eta < 0.0) throw config_error("eta must be >= 0");
    if (b_max < 0.0) throw config_error("b_max must be >= 0");
    if (k_actions < 1) throw config_error("k_actions must be >= 1");
    if (!(target_soc > 0.0 && target_soc <= 1.0)) throw config_error("target_soc must be in (0,1]");
    if (!is_known_algorithm(algorithm)) {
        std::string msg = "unknown algorithm '" + algorithm + "'; valid:";
        for (const auto& n : algorithm_names()) msg += " " + n;
        throw config_error(msg);
    }
    grid().validate();
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
    if (key == "n_evs") n_evs = static_cast<int>(parse_int(key, value));
    else if (key == "n_stations") n_stations = static_cast<int>(parse_int(key, value));
    else if (key == "max_load_kw") max_load_kw = parse_double(key, value);
    else if (key == "peak_kw") peak_kw = parse_double(key, value);
    else if (key == "v_charg_init") v_charg_init = parse_double(key, value);
    else if (key == "v_dead") v_dead = parse_double(key, value);
    else if (key == "eta") eta = parse_double(key, value);
    else if (key == "alpha") alpha = parse_double(key, value);
    else if (key == "b_max") b_max = parse_double(key, value);
    else if (key == "k_actions") k_actions = static_cast<int>(parse_int(key, value));
    else if (key == "charging_efficiency") charging_efficiency = parse_double(key, value);
    else if (key == "rng_seed") rng_seed = static_cast<unsigned long long>(parse_int(key, value));
    else if (key == "arrival_mean_hour") arrival_mean_hour = parse_double(key, value);
    else if (key == "arrival_std_hour") arrival_std_hour = parse_double(key, value);
    else if (key == "departure_mean_hour") departure_mean_hour = parse_double(key, value);
    else if (key == "departure_std_hour") departure_std_hour = parse_double(key, value);
    else if (key == "forecast_price_noise_std") forecast_price_noise_std = parse_double(key, value);
    else if (key == "forecast_renewable_noise_std") forecast_renewable_noise_std = parse_double(key, value);
    else if (key == "forecast_base_noise_std") forecast_base_noise_std = parse_double(key, value);
    else if (key == "forecast_from_truth") forecast_from_truth = parse_int(key, value) != 0;
    else if (key == "algorithm") algorithm = value;
    else if (key == "slot_count") slot_count = static_cast<int>(parse_int(key, value));
    else if (key == "slot_hours") slot_hours = parse_double(key, value);
    else if (key == "solar_capacity_kw") solar_capacity_kw = parse_double(key, value);
    else if (key == "wind_capacity_kw") wind_capacity_kw = parse_double(key, value);
    else if (key == "battery_capacity_kwh") battery_capacity_kwh = parse_double(key, value);
    else if (key == "max_rate_kw") max_rate_kw = parse_double(key, value);
    else if (key == "target_soc") target_soc = parse_double(key, value);
    else if (key == "solar_installed") solar_installed = parse_double(key, value);
    else if (key == "wind_installed") wind_installed = parse_double(key, value);
    else if (key == "series_csv") series_csv = value;
    else throw config_error("unknown config key '" + key + "'");
}

std::map<std::string, std::string> ScenarioConfig::echo() const {
    std::map<std::string, std::string> m;
    m["n_evs"] = std::to_string(n_evs);
    m["n_stations"] = std::to_string(n_stations);
    m["max_load_kw"] = fmt_full(max_load_kw);
    m["peak_kw"] = fmt_full(peak_kw);
    m["v_charg_init"] = fmt_full(v_charg_init);
    m["v_dead"] = fmt_full(v_dead);
    m["eta"] = fmt_full(eta);
    m["alpha"] = fmt_full(alpha);
    m["b_max"] = fmt_full(b_max);
    m["k_actions"] = std::to_string(k_actions);
    m["charging_efficiency"] = fmt_full(charging_efficiency);
    m["rng_seed"] = std::to_string(rng_seed);
    m["arrival_mean_hour"] = fmt_full(arrival_mean_hour);
    m["arrival_std_hour"] = fmt_full(arrival_std_hour);
    m["departure_mean_hour"] = fmt_full(departure_mean_hour);
    m["departure_std_hour"] = fmt_full(departure_std_hour);
    m["forecast_price_noise_std"] = fmt_full(forecast_price_noise_std);
    m["forecast_renewable_noise_std"] = fmt_full(forecast_renewable_noise_std);
    m["forecast_base_noise_std"] = fmt_full(forecast_base_noise_std);
    m["forecast_from_truth"] = forecast_from_truth ? "1" : "0";
    m["algorithm"] = algorithm;
    m["slot_count"] = std::to_string(slot_count);
    m["slot_hours"] = fmt_full(slot_hours);
    m["solar_capacity_kw"] = fmt_full(solar_capacity_kw);
    m["wind_capacity_kw"] = fmt_full(wind_capacity_kw);
    m["battery_capacity_kwh"] = fmt_full(battery_capacity_kwh);
    m["max_rate_kw"] = fmt_full(max_rate_kw);
    m["target_soc"] = fmt_full(target_soc);
    m["solar_installed"] = fmt_full(solar_installed);
    m["wind_installed"] = fmt_full(wind_installed);
    m["series_csv"] = series_csv;
    return m;
}

const std::vector<std::pair<std::string, std::string>>& ScenarioConfig::key_help() {
    static const std::vector<std::pair<std::string, std::string>> help{
        {"n_evs", "fleet size (default 25)"},
        {"n_stations", "number of charging stations (default 2)"},
        {"max_load_kw", "base-load rescale target (default 100)"},
        {"peak_kw", "grid peak cap (default 120)"},
        {"v_charg_init", "initial cost trade-off weight per station (default 350)"},
        {"v_dead", "risk trade-off weight per EV (default 200)"},
        {"eta", "pressure-queue growth factor (default 1)"},
        {"alpha", "trade-off adaptation rate (default 0.001)"},
        {"b_max", "waiting-queue cap (default 20)"},
        {"k_actions", "deadline menu size (default 5)"},
        {"charging_efficiency", "grid-to-battery efficiency (default 0.9)"},
        {"rng_seed", "fleet/forecast seed (default 1)"},
        {"arrival_mean_hour", "mean arrival clock hour (default 8)"},
        {"arrival_std_hour", "arrival spread in hours (default 1)"},
        {"departure_mean_hour", "mean departure clock hour (default 17)"},
        {"departure_std_hour", "departure spread in hours (default 1)"},
        {"forecast_price_noise_std", "price forecast noise; <0 means 0.1*mean"},
        {"forecast_renewable_noise_std", "renewable forecast noise; <0 means 0.1*mean"},
        {"forecast_base_noise_std", "base-load forecast noise; <0 means 0.1*mean"},
        {"forecast_from_truth", "1: finish estimates use the true series (default 0)"},
        {"algorithm", "proposed | occma | ocsa_f | ocsa_n | edf"},
        {"slot_count", "slots per day (default 96)"},
        {"slot_hours", "slot length in hours (default 0.25)"},
        {"solar_capacity_kw", "per-station solar scale (default 30)"},
        {"wind_capacity_kw", "per-station wind scale (default 10)"},
        {"battery_capacity_kwh", "EV battery size (default 40)"},
        {"max_rate_kw", "EV charging rate cap (default 6.6)"},
        {"target_soc", "departure SOC target (default 1.0)"},
        {"solar_installed", "ingestion: solar column capacity; 0 = by max"},
        {"wind_installed", "ingestion: wind column capacity; 0 = by max"},
        {"series_csv", "day CSV path; empty = built-in synthetic day"},
    };
    return help;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    ScenarioConfig cfg;
    std::string line;
    long n = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(n) + ": expected key = value");
        cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Series ingestion and the bundled synthetic day
// ---------------------------------------------------------------------------

SeriesBundle load_series(const std::string& path, const ColumnMap& columns,
                         const TimeGrid& grid, const SeriesNormalization& norm) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open series file " + path);
    std::string line;
    if (!std::getline(in, line)) throw ingest_error("empty series file", 0);
    const std::vector<std::string> header = split_csv(line);
    auto col = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name) return static_cast<int>(i);
        throw ingest_error("missing column '" + name + "'", 0);
    };
    const int c_ts = col(columns.timestamp);
    const int c_base = col(columns.base_load);
    const int c_price = col(columns.price);
    const int c_solar = col(columns.solar);
    const int c_wind = col(columns.wind);

    const std::int64_t slot_sec = static_cast<std::int64_t>(std::llround(grid.slot_hours * 3600.0));
    const int n = grid.slot_count;
    std::vector<double> sum_base(n, 0.0), sum_price(n, 0.0), sum_solar(n, 0.0), sum_wind(n, 0.0);
    std::vector<long> count(n, 0);
    std::vector<std::int64_t> slot_start(n, 0);

    std::int64_t day_start = 0;
    std::int64_t prev_ts = 0;
    bool first = true;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> f = split_csv(line);
        const int needed = std::max({c_ts, c_base, c_price, c_solar, c_wind});
        if (static_cast<int>(f.size()) <= needed)
            throw ingest_error("short row", row);
        const std::int64_t ts = parse_timestamp(f[c_ts], row);
        if (first) {
            day_start = ts - ((ts % 86400) + 86400) % 86400;
            first = false;
        } else {
            if (ts <= prev_ts) throw ingest_error("non-monotone timestamp", row);
            if (ts - prev_ts > slot_sec)
                throw ingest_error("gap larger than one slot", row);
        }
        prev_ts = ts;
        const std::int64_t off = ts - day_start;
        const std::int64_t slot = off / slot_sec;
        if (slot < 0 || slot >= n) throw ingest_error("timestamp outside the grid", row);
        auto num = [&](int c) {
            try {
                return std::stod(f[c]);
            } catch (const std::exception&) {
                throw ingest_error("bad numeric field '" + f[c] + "'", row);
            }
        };
        sum_base[slot] += num(c_base);
        sum_price[slot] += num(c_price);
        sum_solar[slot] += num(c_solar);
        sum_wind[slot] += num(c_wind);
        ++count[slot];
    }
    for (int t = 0; t < n; ++t) {
        if (count[t] == 0)
            throw ingest_error("series does not cover slot " + std::to_string(t), row);
        slot_start[t] = day_start + t * slot_sec;
    }

    SeriesBundle out;
    out.slot_start_epoch = slot_start;
    out.base_load_kw.resize(n);
    out.price_per_kwh.resize(n);
    out.solar_per_unit.resize(n);
    out.wind_per_unit.resize(n);
    for (int t = 0; t < n; ++t) {
        out.base_load_kw[t] = sum_base[t] / count[t];
        out.price_per_kwh[t] = sum_price[t] / count[t] * norm.price_scale;
        out.solar_per_unit[t] = sum_solar[t] / count[t];
        out.wind_per_unit[t] = sum_wind[t] / count[t];
    }
    if (norm.max_load_kw > 0.0) {
        const double m = series_max(out.base_load_kw);
        if (m > 0.0)
            for (double& v : out.base_load_kw) v = v / m * norm.max_load_kw;
    }
    auto per_unit = [](std::vector<double>& v, double installed) {
        const double denom = installed > 0.0 ? installed : series_max(v);
        if (denom > 0.0)
            for (double& x : v) x = std::clamp(x / denom, 0.0, 1.0);
    };
    per_unit(out.solar_per_unit, norm.solar_installed);
    per_unit(out.wind_per_unit, norm.wind_installed);
    return out;
}

namespace {

// Shapes of the synthetic day, on the clock hour in [0, 24).
double synth_base_pu(double h) {
    const double morning = 0.13 * std::exp(-(h - 8.5) * (h - 8.5) / (2.0 * 2.2 * 2.2));
    const double evening = 0.48 * std::exp(-(h - 19.0) * (h - 19.0) / (2.0 * 2.6 * 2.6));
    return 0.52 + morning + evening;
}

// Overcast-leaning profile: peak capacity factor 0.45 around 13:00.
double synth_solar_pu(double h) {
    if (h <= 6.5 || h >= 19.5) return 0.0;
    const double s = std::sin(3.14159265358979323846 * (h - 6.5) / 13.0);
    return 0.45 * std::pow(std::max(0.0, s), 2.2);
}

} // namespace

SeriesBundle synthetic_day(const TimeGrid& grid, double max_load_kw) {
    const int n = grid.slot_count;
    SeriesBundle s;
    s.slot_start_epoch.resize(n);
    s.base_load_kw.resize(n);
    s.price_per_kwh.resize(n);
    s.solar_per_unit.resize(n);
    s.wind_per_unit.resize(n);

    Rng wind_rng(20180501u);
    std::vector<double> base_pu(n), net(n);
    for (int t = 0; t < n; ++t) {
        const double h = grid.hour_of_slot(t) + 0.5 * grid.slot_hours;
        s.slot_start_epoch[t] =
            static_cast<std::int64_t>(std::llround(grid.hour_of_slot(t) * 3600.0));
        base_pu[t] = synth_base_pu(h);
        s.solar_per_unit[t] = synth_solar_pu(h);
        const double w = 0.12 + 0.07 * std::sin(2.0 * 3.14159265358979323846 * (h + 6.0) / 24.0) +
                         0.03 * wind_rng.normal();
        s.wind_per_unit[t] = std::clamp(w, 0.01, 0.6);
    }
    const double base_max = series_max(base_pu);
    for (int t = 0; t < n; ++t) {
        base_pu[t] /= base_max;
        s.base_load_kw[t] = base_pu[t] * max_load_kw;
        net[t] = base_pu[t] - 0.50 * s.solar_per_unit[t];
    }
    double nmin = net[0], nmax = net[0];
    for (double v : net) {
        nmin = std::min(nmin, v);
        nmax = std::max(nmax, v);
    }
    // Price tracks net load: cheap when solar carves the midday valley,
    // expensive through the evening ramp. Units: money per kWh.
    for (int t = 0; t < n; ++t) {
        const double u = (net[t] - nmin) / std::max(1e-12, nmax - nmin);
        s.price_per_kwh[t] = 3.0 + 8.0 * u;
    }
    return s;
}

void write_raw_day_csv(const std::string& path) {
    // One-minute resolution so ingestion really exercises the resampler.
    const TimeGrid minute{1440, 1.0 / 60.0, 0.0};
    SeriesBundle fine = synthetic_day(minute, 1.0);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    out << "timestamp,base_load,price,solar,wind\n";
    for (int i = 0; i < 1440; ++i) {
        out << "2018-05-01 " << (i / 60 < 10 ? "0" : "") << i / 60 << ":"
            << (i % 60 < 10 ? "0" : "") << i % 60 << ":00,"
            << fmt_full(fine.base_load_kw[i] * 23000.0) << "," << fmt_full(fine.price_per_kwh[i])
            << "," << fmt_full(fine.solar_per_unit[i]) << "," << fmt_full(fine.wind_per_unit[i])
            << "\n";
    }
}

void write_series_csv(const std::string& path, const SeriesBundle& series,
                      const TimeGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    out << "timestamp,base_load,price,solar,wind\n";
    for (int t = 0; t < grid.slot_count; ++t)
        out << series.slot_start_epoch[t] << "," << fmt_full(series.base_load_kw[t]) << ","
            << fmt_full(series.price_per_kwh[t]) << "," << fmt_full(series.solar_per_unit[t])
            << "," << fmt_full(series.wind_per_unit[t]) << "\n";
}

GridSignals to_signals(const SeriesBundle& series, const ScenarioConfig& cfg) {
    GridSignals g;
    g.base_load_kw = series.base_load_kw;
    g.price_per_kwh = series.price_per_kwh;
    g.solar_per_unit = series.solar_per_unit;
    g.wind_per_unit = series.wind_per_unit;
    g.peak_kw = cfg.peak_kw;
    g.charging_efficiency = cfg.charging_efficiency;
    g.validate(cfg.grid());
    return g;
}

SeriesBundle load_or_synthesize_series(const ScenarioConfig& cfg) {
    if (cfg.series_csv.empty()) return synthetic_day(cfg.grid(), cfg.max_load_kw);
    SeriesNormalization norm;
    norm.max_load_kw = cfg.max_load_kw;
    norm.solar_installed = cfg.solar_installed;
    norm.wind_installed = cfg.wind_installed;
    return load_series(cfg.series_csv, ColumnMap{}, cfg.grid(), norm);
}

// ---------------------------------------------------------------------------
// Fleet generation and forecasts
// ---------------------------------------------------------------------------

std::vector<EvRecord> generate_fleet(const ScenarioConfig& cfg, const TimeGrid& grid) {
    Rng rng(cfg.rng_seed);
    std::vector<EvRecord> fleet;
    fleet.reserve(cfg.n_evs);
    const int last = grid.slot_count - 1;
    for (int i = 0; i < cfg.n_evs; ++i) {
        EvRecord ev;
        ev.id = i;
        ev.soc = rng.uniform();
        const double arrive_h = rng.normal(cfg.arrival_mean_hour, cfg.arrival_std_hour);
        const double depart_h = rng.normal(cfg.departure_mean_hour, cfg.departure_std_hour);
        ev.station = rng.uniform_int(cfg.n_stations);
        ev.arrival_slot = std::clamp(grid.slot_of_hour(arrive_h), 0, last - 1);
        ev.deadline_slot = std::clamp(grid.slot_of_hour(depart_h), ev.arrival_slot + 1, last);
        ev.original_deadline_slot = ev.deadline_slot;
        ev.capacity_kwh = cfg.battery_capacity_kwh;
        ev.target_soc = cfg.target_soc;
        ev.soc = std::min(ev.soc, 1.0);
        ev.max_rate_kw = cfg.max_rate_kw;
        ev.b_queue = 0.0;
        ev.b_max = cfg.b_max;
        ev.v_dead = cfg.v_dead;
        fleet.push_back(ev);
    }
    return fleet;
}

namespace {

void add_noise(std::vector<double>& v, double sigma, Rng& rng, double hi) {
    double s = sigma;
    if (s < 0.0) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= std::max<std::size_t>(1, v.size());
        s = 0.1 * mean;
    }
    for (double& x : v) x = std::clamp(x + s * rng.normal(), 0.0, hi);
}

} // namespace

SeriesBundle make_forecast(const SeriesBundle& truth, const ScenarioConfig& cfg) {
    SeriesBundle fc = truth;
    if (cfg.forecast_from_truth) return fc;
    Rng rng(cfg.rng_seed ^ 0xF0C5u);
    const double inf = std::numeric_limits<double>::infinity();
    add_noise(fc.base_load_kw, cfg.forecast_base_noise_std, rng, inf);
    add_noise(fc.price_per_kwh, cfg.forecast_price_noise_std, rng, inf);
    add_noise(fc.solar_per_unit, cfg.forecast_renewable_noise_std, rng, 1.0);
    add_noise(fc.wind_per_unit, cfg.forecast_renewable_noise_std, rng, 1.0);
    return fc;
}

// ---------------------------------------------------------------------------
// Result export
// ---------------------------------------------------------------------------

ExportPaths export_results(const RunResult& run, const ScenarioConfig& cfg,
                           const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    ExportPaths paths;
    paths.slots_csv = out_dir + "/slots.csv";
    paths.evs_csv = out_dir + "/evs.csv";
    paths.summary_json = out_dir + "/summary.json";

    const std::size_t m = run.slots.empty() ? 0 : run.slots.front().purchases_kwh.size();
    {
        std::ofstream out(paths.slots_csv, std::ios::binary);
        if (!out) throw io_error("cannot write " + paths.slots_csv);
        out << "slot,price_per_kwh,base_load_kw,purchased_kwh,renewable_used_kwh,curtailed_kwh,"
               "slot_cost,q_sum,z_sum,b_sum,unused_kwh,peak_binding,objective,peak_multiplier,"
               "drift_q_margin,drift_z_margin,drift_b_margin";
        for (std::size_t i = 0; i < m; ++i)
            out << ",x_" << i << ",y_" << i << ",q_" << i << ",z_" << i;
        out << "\n";
        for (const SlotDecision& s : run.slots) {
            double x = 0, r = 0, c = 0, qs = 0, zs = 0, bs = 0;
            for (double v : s.purchases_kwh) x += v;
            for (double v : s.renewable_used_kwh) r += v;
            for (double v : s.curtailed_kwh) c += v;
            for (double v : s.q_after) qs += v;
            for (double v : s.z_after) zs += v;
            for (const auto& [id, b] : s.b_after) {
                (void)id;
                bs += b;
            }
            double qm = std::numeric_limits<double>::infinity();
            double zm = qm, bm = qm;
            for (const auto& row : s.audit.stations) {
                qm = std::min(qm, row.bound_q - row.q_drift());
                zm = std::min(zm, row.bound_z - row.z_drift());
            }
            for (const auto& row : s.audit.evs)
                if (row.applicable) bm = std::min(bm, row.bound_b - row.b_drift());
            out << s.slot << "," << fmt_full(s.price_per_kwh) << "," << fmt_full(s.base_load_kw)
                << "," << fmt_full(x) << "," << fmt_full(r) << "," << fmt_full(c) << ","
                << fmt_full(s.cost) << "," << fmt_full(qs) << "," << fmt_full(zs) << ","
                << fmt_full(bs) << "," << fmt_full(s.unused_kwh) << ","
                << (s.peak_binding ? 1 : 0) << "," << fmt_full(s.objective) << ","
                << fmt_full(s.peak_multiplier);
            out << "," << (std::isinf(qm) ? "" : fmt_full(qm));
            out << "," << (std::isinf(zm) ? "" : fmt_full(zm));
            out << "," << (std::isinf(bm) ? "" : fmt_full(bm));
            for (std::size_t i = 0; i < m; ++i) {
                out << "," << fmt_full(s.purchases_kwh[i]) << "," << fmt_full(s.totals_kwh[i])
                    << "," << fmt_full(s.q_after[i]) << "," << fmt_full(s.z_after[i]);
            }
            out << "\n";
        }
    }
    {
        std::ofstream out(paths.evs_csv, std::ios::binary);
        if (!out) throw io_error("cannot write " + paths.evs_csv);
        out << "id,station,arrival_slot,finish_slot,original_deadline_slot,final_deadline_slot,"
               "capacity_kwh,initial_soc,final_soc,demand_kwh,delivered_kwh,unmet_kwh,qos\n";
        for (const EvOutcome& ev : run.evs)
            out << ev.id << "," << ev.station << "," << ev.arrival_slot << "," << ev.finish_slot
                << "," << ev.original_deadline_slot << "," << ev.final_deadline_slot << ","
                << fmt_full(ev.capacity_kwh) << "," << fmt_full(ev.initial_soc) << ","
                << fmt_full(ev.final_soc) << "," << fmt_full(ev.demand_kwh) << ","
                << fmt_full(ev.delivered_kwh) << "," << fmt_full(ev.unmet_kwh) << ","
                << fmt_full(ev.qos) << "\n";
    }
    {
        nlohmann::json j;
        j["algorithm"] = run.algorithm;
        j["seed"] = run.seed;
        j["slot_count"] = run.slots.size();
        j["ev_count"] = run.evs.size();
        j["total_cost"] = run.total_cost;
        j["mean_qos"] = run.mean_qos;
        j["total_demand_kwh"] = run.total_demand_kwh;
        j["total_delivered_kwh"] = run.total_delivered_kwh;
        j["total_unmet_kwh"] = run.total_unmet_kwh;
        j["unmet_fraction"] =
            run.total_demand_kwh > 0.0 ? run.total_unmet_kwh / run.total_demand_kwh : 0.0;
        j["total_purchased_kwh"] = run.total_purchased_kwh;
        j["total_renewable_used_kwh"] = run.total_renewable_used_kwh;
        j["total_curtailed_kwh"] = run.total_curtailed_kwh;
        j["terminal_q_sum"] = run.terminal_q_sum;
        j["terminal_z_sum"] = run.terminal_z_sum;
        j["config"] = cfg.echo();
        std::ofstream out(paths.summary_json, std::ios::binary);
        if (!out) throw io_error("cannot write " + paths.summary_json);
        out << j.dump(2) << "\n";
    }
    return paths;
}

} // namespace evc
