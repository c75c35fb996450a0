#include "glider/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace glider {

namespace {

constexpr const char* kDenseVersion = "glider-dense 1";
constexpr const char* kSparseVersion = "glider-sparse 1";
constexpr const char* kSeriesVersion = "glider-series 1";
constexpr const char* kTruthVersion = "glider-truth 1";
constexpr const char* kEventsVersion = "glider-events 1";
constexpr const char* kConfigVersion = "glider-config 1";

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// Reads logical lines, skipping blanks; line numbers are 1-based physical.
struct LineReader {
    std::istream& in;
    std::string source;
    long line_no = 0;

    bool next(std::string& out) {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            out = trim(raw);
            if (!out.empty()) return true;
        }
        return false;
    }
};

struct HeaderDirective {
    std::string key;    // without '#'
    std::string value;  // rest of line, trimmed
};

// '#key value' with a known key is a directive; any other '#' line is a
// comment.
bool parse_directive(const std::string& line, HeaderDirective& out) {
    if (line.empty() || line[0] != '#') return false;
    const std::string body = trim(line.substr(1));
    const auto sp = body.find_first_of(" \t");
    out.key = sp == std::string::npos ? body : body.substr(0, sp);
    out.value = sp == std::string::npos ? "" : trim(body.substr(sp + 1));
    static const char* known[] = {"version", "epoch",   "origin",
                                  "frame",   "columns", "injection"};
    for (const char* k : known)
        if (out.key == k) return true;
    return false;
}

// Header block: every leading '#'/blank line up to the first data line.
// The #version directive must appear before any data.
struct HeaderParse {
    FileHeader header;
    std::vector<AnomalyInjection> injections;
    std::optional<std::string> first_data_line;
    long first_data_line_no = 0;
};

AnomalyInjection parse_injection_value(const std::string& value, const std::string& source,
                                       long line);

HeaderParse read_header(LineReader& r, const char* expected_version) {
    HeaderParse hp;
    std::string line;
    bool have_version = false;
    while (r.next(line)) {
        if (line[0] != '#') {
            if (!have_version)
                throw ParseError(r.source, r.line_no,
                                 std::string("expected '#version ") + expected_version +
                                     "' before data");
            hp.first_data_line = line;
            hp.first_data_line_no = r.line_no;
            return hp;
        }
        HeaderDirective d;
        if (!parse_directive(line, d)) continue;  // free-form comment
        if (d.key == "version") {
            if (d.value != expected_version)
                throw ParseError(r.source, r.line_no,
                                 "unsupported version '" + d.value + "', expected '" +
                                     expected_version + "'");
            hp.header.version = d.value;
            have_version = true;
        } else if (d.key == "epoch") {
            parse_utc(d.value, r.source, r.line_no);  // validates
            hp.header.epoch_utc = d.value;
        } else if (d.key == "origin") {
            const auto parts = split(d.value, ' ');
            if (parts.size() != 2)
                throw ParseError(r.source, r.line_no, "#origin expects 'lat lon'");
            hp.header.has_origin = true;
            hp.header.origin_lat = parse_double(parts[0], r.source, r.line_no);
            hp.header.origin_lon = parse_double(parts[1], r.source, r.line_no);
        } else if (d.key == "frame") {
            if (d.value == "geodetic")
                hp.header.frame = PositionFrameKind::geodetic;
            else if (d.value == "local")
                hp.header.frame = PositionFrameKind::local;
            else
                throw ParseError(r.source, r.line_no,
                                 "#frame must be 'geodetic' or 'local'");
        } else if (d.key == "injection") {
            hp.injections.push_back(parse_injection_value(d.value, r.source, r.line_no));
        }
        // #columns is informational
    }
    if (!have_version)
        throw ParseError(r.source, std::max(r.line_no, 1L),
                         std::string("missing '#version ") + expected_version + "' header");
    return hp;
}

AnomalyInjection parse_injection_value(const std::string& value, const std::string& source,
                                       long line) {
    const auto parts = split(value, ' ');
    if (parts.size() != 4)
        throw ParseError(source, line, "injection expects 'kind t_start t_end magnitude'");
    AnomalyInjection a;
    try {
        a.kind = anomaly_kind_from_string(parts[0]);
    } catch (const ConfigError& e) {
        throw ParseError(source, line, e.what());
    }
    a.t_start = parse_double(parts[1], source, line);
    a.t_end = parse_double(parts[2], source, line);
    a.magnitude = parse_double(parts[3], source, line);
    return a;
}

void require_fields(const std::vector<std::string>& fields, std::size_t lo, std::size_t hi,
                    const std::string& source, long line) {
    if (fields.size() < lo || fields.size() > hi)
        throw ParseError(source, line,
                         "expected " + std::to_string(lo) +
                             (hi != lo ? ".." + std::to_string(hi) : "") + " fields, got " +
                             std::to_string(fields.size()));
}

void check_monotonic(double t, double prev, bool any_prev, const std::string& source,
                     long line) {
    if (any_prev && !(t > prev))
        throw ParseError(source, line, "time " + fmt_double(t) +
                                           " is not strictly increasing (previous " +
                                           fmt_double(prev) + ")");
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

void write_common_header(std::ostream& out, const char* version, const FileHeader& h) {
    out << "#version " << version << "\n";
    if (!h.epoch_utc.empty()) out << "#epoch " << h.epoch_utc << "\n";
    if (h.has_origin)
        out << "#origin " << fmt_double(h.origin_lat) << " " << fmt_double(h.origin_lon)
            << "\n";
}

}  // namespace

std::string fmt_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& token, const std::string& source, long line) {
    const std::string t = trim(token);
    if (t.empty()) throw ParseError(source, line, "empty numeric field");
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    bool negative = false;
    if (*first == '+' || *first == '-') {
        negative = *first == '-';
        ++first;
    }
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw ParseError(source, line, "malformed number '" + t + "'");
    return negative ? -v : v;
}

std::string format_utc(long long epoch_seconds) {
    std::time_t tt = static_cast<std::time_t>(epoch_seconds);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

long long parse_utc(const std::string& iso, const std::string& source, long line) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    char z = 0;
    if (std::sscanf(iso.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &se,
                    &z) != 7 ||
        z != 'Z' || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60)
        throw ParseError(source, line, "malformed UTC timestamp '" + iso + "'");
    std::tm tm{};
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = se;
    return static_cast<long long>(timegm(&tm));
}

// ---------------------------------------------------------------------------
// Dense records
// ---------------------------------------------------------------------------

DenseFile read_dense_stream(std::istream& in, const std::string& source) {
    LineReader r{in, source};
    HeaderParse hp = read_header(r, kDenseVersion);
    DenseFile file;
    file.header = hp.header;

    double prev_t = 0.0;
    bool any = false;
    std::string line;
    long line_no = 0;
    bool pending = hp.first_data_line.has_value();
    if (pending) {
        line = *hp.first_data_line;
        line_no = hp.first_data_line_no;
    }
    while (pending || r.next(line)) {
        if (!pending) line_no = r.line_no;
        pending = false;
        if (line[0] == '#') continue;
        const auto f = split(line, ',');
        require_fields(f, 4, 4, source, line_no);
        DenseRecord rec;
        rec.t = parse_double(f[0], source, line_no);
        rec.lat = parse_double(f[1], source, line_no);
        rec.lon = parse_double(f[2], source, line_no);
        rec.heading = parse_double(f[3], source, line_no);
        check_monotonic(rec.t, prev_t, any, source, line_no);
        if (file.header.frame == PositionFrameKind::geodetic &&
            (std::abs(rec.lat) > 90.0 || std::abs(rec.lon) > 180.0))
            throw ParseError(source, line_no, "latitude/longitude out of range");
        prev_t = rec.t;
        any = true;
        file.records.push_back(rec);
    }
    return file;
}

DenseFile read_dense(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_dense_stream(in, path.string());
}

void write_dense(const std::filesystem::path& path, const DenseFile& file) {
    auto out = open_out(path);
    write_common_header(out, kDenseVersion, file.header);
    out << "#frame "
        << (file.header.frame == PositionFrameKind::geodetic ? "geodetic" : "local") << "\n";
    out << "#columns t,"
        << (file.header.frame == PositionFrameKind::geodetic ? "lat,lon" : "x,y")
        << ",heading\n";
    for (const auto& rec : file.records)
        out << fmt_double(rec.t) << "," << fmt_double(rec.lat) << "," << fmt_double(rec.lon)
            << "," << fmt_double(rec.heading) << "\n";
}

// ---------------------------------------------------------------------------
// Sparse records
// ---------------------------------------------------------------------------

namespace {

std::vector<SparseSample> parse_samples_field(const std::string& field,
                                              const std::string& source, long line) {
    std::vector<SparseSample> samples;
    if (trim(field).empty()) return samples;
    for (const auto& triple : split(field, ';')) {
        const auto parts = split(triple, ':');
        if (parts.size() != 3)
            throw ParseError(source, line, "sample expects 't:lat:lon'");
        samples.push_back({parse_double(parts[0], source, line),
                           parse_double(parts[1], source, line),
                           parse_double(parts[2], source, line)});
    }
    return samples;
}

std::string samples_field(const std::vector<SparseSample>& samples) {
    std::string out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i > 0) out += ";";
        out += fmt_double(samples[i].t) + ":" + fmt_double(samples[i].lat) + ":" +
               fmt_double(samples[i].lon);
    }
    return out;
}

}  // namespace

SparseFile read_sparse_stream(std::istream& in, const std::string& source) {
    LineReader r{in, source};
    HeaderParse hp = read_header(r, kSparseVersion);
    SparseFile file;
    file.header = hp.header;

    double prev_end = 0.0;
    bool any = false;
    std::string line;
    long line_no = 0;
    bool pending = hp.first_data_line.has_value();
    if (pending) {
        line = *hp.first_data_line;
        line_no = hp.first_data_line_no;
    }
    while (pending || r.next(line)) {
        if (!pending) line_no = r.line_no;
        pending = false;
        if (line[0] == '#') continue;
        const auto f = split(line, ',');
        require_fields(f, 9, 10, source, line_no);
        SparseRecord rec;
        rec.segment_start_t = parse_double(f[0], source, line_no);
        rec.segment_end_t = parse_double(f[1], source, line_no);
        rec.start_lat = parse_double(f[2], source, line_no);
        rec.start_lon = parse_double(f[3], source, line_no);
        rec.end_lat = parse_double(f[4], source, line_no);
        rec.end_lon = parse_double(f[5], source, line_no);
        rec.mean_heading = parse_double(f[6], source, line_no);
        rec.f_m.x() = parse_double(f[7], source, line_no);
        rec.f_m.y() = parse_double(f[8], source, line_no);
        if (f.size() == 10) rec.samples = parse_samples_field(f[9], source, line_no);
        if (!(rec.segment_end_t > rec.segment_start_t))
            throw ParseError(source, line_no, "segment must end after it starts");
        if (any && rec.segment_start_t < prev_end - 1e-9)
            throw ParseError(source, line_no, "segments overlap or run backwards");
        prev_end = rec.segment_end_t;
        any = true;
        file.records.push_back(std::move(rec));
    }
    return file;
}

SparseFile read_sparse(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_sparse_stream(in, path.string());
}

void write_sparse(const std::filesystem::path& path, const SparseFile& file) {
    auto out = open_out(path);
    write_common_header(out, kSparseVersion, file.header);
    out << "#columns start_t,end_t,start_lat,start_lon,end_lat,end_lon,mean_heading,"
           "f_m_u,f_m_v,samples\n";
    for (const auto& rec : file.records) {
        out << fmt_double(rec.segment_start_t) << "," << fmt_double(rec.segment_end_t) << ","
            << fmt_double(rec.start_lat) << "," << fmt_double(rec.start_lon) << ","
            << fmt_double(rec.end_lat) << "," << fmt_double(rec.end_lon) << ","
            << fmt_double(rec.mean_heading) << "," << fmt_double(rec.f_m.x()) << ","
            << fmt_double(rec.f_m.y());
        if (!rec.samples.empty()) out << "," << samples_field(rec.samples);
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Estimate series
// ---------------------------------------------------------------------------

SeriesFile read_series_stream(std::istream& in, const std::string& source) {
    LineReader r{in, source};
    HeaderParse hp = read_header(r, kSeriesVersion);
    SeriesFile file;
    file.header = hp.header;

    double prev_t = 0.0;
    bool any = false;
    std::string line;
    long line_no = 0;
    bool pending = hp.first_data_line.has_value();
    if (pending) {
        line = *hp.first_data_line;
        line_no = hp.first_data_line_no;
    }
    while (pending || r.next(line)) {
        if (!pending) line_no = r.line_no;
        pending = false;
        if (line[0] == '#') continue;
        const auto f = split(line, ',');
        require_fields(f, 9, 9, source, line_no);
        EstimateSample s;
        s.t = parse_double(f[0], source, line_no);
        s.x_meas.x() = parse_double(f[1], source, line_no);
        s.x_meas.y() = parse_double(f[2], source, line_no);
        s.x_hat.x() = parse_double(f[3], source, line_no);
        s.x_hat.y() = parse_double(f[4], source, line_no);
        s.clle = parse_double(f[5], source, line_no);
        s.v_l = parse_double(f[6], source, line_no);
        s.f_l.x() = parse_double(f[7], source, line_no);
        s.f_l.y() = parse_double(f[8], source, line_no);
        check_monotonic(s.t, prev_t, any, source, line_no);
        prev_t = s.t;
        any = true;
        file.series.samples.push_back(s);
    }
    return file;
}

SeriesFile read_series(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_series_stream(in, path.string());
}

void write_series(const std::filesystem::path& path, const SeriesFile& file) {
    auto out = open_out(path);
    write_common_header(out, kSeriesVersion, file.header);
    out << "#columns t,x,y,x_hat,y_hat,clle,v_l,f_l_u,f_l_v\n";
    for (const auto& s : file.series.samples)
        out << fmt_double(s.t) << "," << fmt_double(s.x_meas.x()) << ","
            << fmt_double(s.x_meas.y()) << "," << fmt_double(s.x_hat.x()) << ","
            << fmt_double(s.x_hat.y()) << "," << fmt_double(s.clle) << ","
            << fmt_double(s.v_l) << "," << fmt_double(s.f_l.x()) << ","
            << fmt_double(s.f_l.y()) << "\n";
}

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

TruthFile read_truth_stream(std::istream& in, const std::string& source) {
    LineReader r{in, source};
    HeaderParse hp = read_header(r, kTruthVersion);
    TruthFile file;
    file.header = hp.header;
    file.injections = hp.injections;

    double prev_t = 0.0;
    bool any = false;
    std::string line;
    long line_no = 0;
    bool pending = hp.first_data_line.has_value();
    if (pending) {
        line = *hp.first_data_line;
        line_no = hp.first_data_line_no;
    }
    while (pending || r.next(line)) {
        if (!pending) line_no = r.line_no;
        pending = false;
        if (line[0] == '#') continue;
        const auto f = split(line, ',');
        require_fields(f, 7, 7, source, line_no);
        const double t = parse_double(f[0], source, line_no);
        check_monotonic(t, prev_t, any, source, line_no);
        prev_t = t;
        any = true;
        file.truth.times.push_back(t);
        file.truth.positions.emplace_back(parse_double(f[1], source, line_no),
                                          parse_double(f[2], source, line_no));
        file.truth.headings.push_back(parse_double(f[3], source, line_no));
        file.truth.speeds.push_back(parse_double(f[4], source, line_no));
        file.truth.flows.emplace_back(parse_double(f[5], source, line_no),
                                      parse_double(f[6], source, line_no));
    }
    return file;
}

TruthFile read_truth(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_truth_stream(in, path.string());
}

void write_truth(const std::filesystem::path& path, const TruthFile& file) {
    auto out = open_out(path);
    write_common_header(out, kTruthVersion, file.header);
    for (const auto& a : file.injections)
        out << "#injection " << to_string(a.kind) << " " << fmt_double(a.t_start) << " "
            << fmt_double(a.t_end) << " " << fmt_double(a.magnitude) << "\n";
    out << "#columns t,x,y,heading,v_r,f_u,f_v\n";
    for (std::size_t k = 0; k < file.truth.size(); ++k)
        out << fmt_double(file.truth.times[k]) << "," << fmt_double(file.truth.positions[k].x())
            << "," << fmt_double(file.truth.positions[k].y()) << ","
            << fmt_double(file.truth.headings[k]) << "," << fmt_double(file.truth.speeds[k])
            << "," << fmt_double(file.truth.flows[k].x()) << ","
            << fmt_double(file.truth.flows[k].y()) << "\n";
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

std::vector<DetectionEvent> read_events(const std::filesystem::path& path) {
    auto in = open_in(path);
    LineReader r{in, path.string()};
    HeaderParse hp = read_header(r, kEventsVersion);

    std::vector<DetectionEvent> events;
    std::string line;
    long line_no = 0;
    bool pending = hp.first_data_line.has_value();
    if (pending) {
        line = *hp.first_data_line;
        line_no = hp.first_data_line_no;
    }
    while (pending || r.next(line)) {
        if (!pending) line_no = r.line_no;
        pending = false;
        if (line[0] == '#') continue;
        const auto f = split(line, ',');
        require_fields(f, 6, 6, path.string(), line_no);
        DetectionEvent ev;
        ev.t = parse_double(f[0], path.string(), line_no);
        try {
            ev.kind = event_kind_from_string(f[2]);
        } catch (const DomainError& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
        ev.v_l = parse_double(f[3], path.string(), line_no);
        ev.p_e = parse_double(f[4], path.string(), line_no);
        ev.detail = f[5];
        events.push_back(std::move(ev));
    }
    return events;
}

void write_events(const std::filesystem::path& path, const std::vector<DetectionEvent>& events,
                  const std::string& epoch_utc) {
    auto out = open_out(path);
    FileHeader h;
    h.epoch_utc = epoch_utc;
    write_common_header(out, kEventsVersion, h);
    out << "#columns t,utc,kind,v_l,p_e,detail\n";
    const long long epoch = epoch_utc.empty() ? 0 : parse_utc(epoch_utc);
    for (const auto& ev : events)
        out << fmt_double(ev.t) << "," << format_utc(epoch + std::llround(ev.t)) << ","
            << to_string(ev.kind) << "," << fmt_double(ev.v_l) << "," << fmt_double(ev.p_e)
            << "," << ev.detail << "\n";
}

Table read_table(const std::filesystem::path& path) {
    auto in = open_in(path);
    Table table;
    std::string raw;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line, ',');
        if (table.columns.empty())
            table.columns = std::move(cells);
        else {
            if (cells.size() != table.columns.size())
                throw ParseError(path.string(), line_no, "ragged row");
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

namespace {

LocalFrame frame_for(const FileHeader& h) {
    if (!h.has_origin)
        throw ConfigError("origin", "file has no #origin header; cannot project");
    return LocalFrame(h.origin_lat, h.origin_lon);
}

}  // namespace

std::vector<Observation> to_observations(const DenseFile& file) {
    std::vector<Observation> obs;
    obs.reserve(file.records.size());
    if (file.header.frame == PositionFrameKind::local) {
        for (const auto& rec : file.records)
            obs.push_back({rec.t, {rec.lat, rec.lon}, rec.heading});
        return obs;
    }
    const LocalFrame frame = frame_for(file.header);
    for (const auto& rec : file.records)
        obs.push_back({rec.t, frame.project(rec.lat, rec.lon), rec.heading});
    return obs;
}

std::vector<SegmentObservation> to_segment_observations(const SparseFile& file) {
    const LocalFrame frame = frame_for(file.header);
    std::vector<SegmentObservation> out;
    out.reserve(file.records.size());
    for (const auto& rec : file.records) {
        SegmentObservation s;
        s.t0 = rec.segment_start_t;
        s.t1 = rec.segment_end_t;
        s.fix0 = frame.project(rec.start_lat, rec.start_lon);
        s.fix1 = frame.project(rec.end_lat, rec.end_lon);
        s.psi_mean = rec.mean_heading;
        s.f_m = rec.f_m;
        out.push_back(s);
    }
    return out;
}

std::vector<SegmentFlow> to_segment_flows(const SparseFile& file) {
    std::vector<SegmentFlow> out;
    out.reserve(file.records.size());
    for (const auto& rec : file.records)
        out.push_back({rec.segment_start_t, rec.segment_end_t, rec.f_m});
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

bool operator==(const RunConfig& a, const RunConfig& b) {
    auto vec_eq = [](const std::vector<Eigen::Vector2d>& x,
                     const std::vector<Eigen::Vector2d>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] != y[i]) return false;
        return true;
    };
    auto knots_eq = [](const std::vector<HeadingKnot>& x, const std::vector<HeadingKnot>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i].t != y[i].t || x[i].psi != y[i].psi) return false;
        return true;
    };
    auto inj_eq = [](const std::vector<AnomalyInjection>& x,
                     const std::vector<AnomalyInjection>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i].kind != y[i].kind || x[i].t_start != y[i].t_start ||
                x[i].t_end != y[i].t_end || x[i].magnitude != y[i].magnitude)
                return false;
        return true;
    };
    return a.scenario_id == b.scenario_id && a.epoch_utc == b.epoch_utc &&
           a.frame_lat0 == b.frame_lat0 && a.frame_lon0 == b.frame_lon0 &&
           a.basis_count == b.basis_count && a.basis_sigma == b.basis_sigma &&
           a.basis_omega == b.basis_omega && a.basis_phase == b.basis_phase &&
           a.basis_sigma_overrides == b.basis_sigma_overrides &&
           vec_eq(a.basis_centers, b.basis_centers) &&
           a.basis_grid_inset == b.basis_grid_inset && a.coverage_floor == b.coverage_floor &&
           a.sim_v_true == b.sim_v_true && a.sim_duration == b.sim_duration &&
           a.sim_dt == b.sim_dt && a.sim_surfacing_interval == b.sim_surfacing_interval &&
           a.sim_segment_subsample == b.sim_segment_subsample &&
           a.sim_include_segment_samples == b.sim_include_segment_samples &&
           a.sim_seed == b.sim_seed && a.sim_noise_position_std == b.sim_noise_position_std &&
           a.sim_noise_heading_std == b.sim_noise_heading_std &&
           a.sim_arrival_radius == b.sim_arrival_radius &&
           vec_eq(a.sim_waypoints, b.sim_waypoints) &&
           knots_eq(a.sim_heading_knots, b.sim_heading_knots) &&
           vec_eq(a.flow_theta_cols, b.flow_theta_cols) &&
           a.flow_draw_magnitude == b.flow_draw_magnitude && a.gains_k == b.gains_k &&
           a.gains_gamma_bar == b.gains_gamma_bar && a.gains_s == b.gains_s &&
           a.est_v0 == b.est_v0 && a.est_internal_dt == b.est_internal_dt &&
           a.est_emit_dt == b.est_emit_dt &&
           a.est_innovation_guard == b.est_innovation_guard &&
           a.est_gap_factor == b.est_gap_factor && a.det_v_min == b.det_v_min &&
           a.det_v_max == b.det_v_max && a.det_gamma_f == b.det_gamma_f &&
           a.det_debounce == b.det_debounce && a.det_burn_in == b.det_burn_in &&
           inj_eq(a.injections, b.injections);
}

namespace {

struct IndexedValue {
    int index;
    std::string value;
    long line;
};

void validate_config(const RunConfig& cfg) {
    if (cfg.basis_count < 1) throw ConfigError("basis.count", "must be >= 1");
    if (!(cfg.basis_sigma > 0.0)) throw ConfigError("basis.sigma", "must be positive");
    if (!(cfg.basis_omega >= 0.0)) throw ConfigError("basis.omega", "must be >= 0");
    if (!cfg.basis_sigma_overrides.empty() &&
        cfg.basis_sigma_overrides.size() != static_cast<std::size_t>(cfg.basis_count))
        throw ConfigError("basis.sigma", "per-basis overrides must cover every basis");
    if (!cfg.basis_centers.empty() &&
        cfg.basis_centers.size() != static_cast<std::size_t>(cfg.basis_count))
        throw ConfigError("basis.center", "explicit centers must match basis.count");
    if (!(cfg.basis_grid_inset >= 0.0 && cfg.basis_grid_inset < 0.5))
        throw ConfigError("basis.grid_inset", "must be in [0, 0.5)");
    if (!(cfg.coverage_floor > 0.0 && cfg.coverage_floor < 1.0))
        throw ConfigError("coverage.floor", "must be in (0, 1)");
    if (!(cfg.sim_v_true > 0.0)) throw ConfigError("sim.v_true", "must be positive");
    if (!(cfg.sim_dt > 0.0)) throw ConfigError("sim.dt", "must be positive");
    if (!(cfg.sim_surfacing_interval > 0.0))
        throw ConfigError("sim.surfacing_interval", "must be positive");
    if (!(cfg.sim_duration >= cfg.sim_surfacing_interval))
        throw ConfigError("sim.duration", "must cover at least one surfacing interval");
    if (cfg.sim_segment_subsample < 1)
        throw ConfigError("sim.segment_subsample", "must be >= 1");
    if (cfg.sim_noise_position_std < 0.0)
        throw ConfigError("sim.noise.position_std", "must be >= 0");
    if (cfg.sim_noise_heading_std < 0.0)
        throw ConfigError("sim.noise.heading_std", "must be >= 0");
    if (!(cfg.sim_arrival_radius > 0.0))
        throw ConfigError("sim.arrival_radius", "must be positive");
    if (!cfg.sim_waypoints.empty() && !cfg.sim_heading_knots.empty())
        throw ConfigError("sim.heading", "choose waypoints or heading knots, not both");
    if (!cfg.flow_theta_cols.empty() &&
        cfg.flow_theta_cols.size() != static_cast<std::size_t>(cfg.basis_count))
        throw ConfigError("sim.flow.theta", "explicit columns must match basis.count");
    if (!(cfg.flow_draw_magnitude >= 0.0))
        throw ConfigError("sim.flow.draw_magnitude", "must be >= 0");
    if (!(cfg.gains_gamma_bar > 0.0)) throw ConfigError("gains.gamma_bar", "must be positive");
    if (!(cfg.gains_s > 0.0)) throw ConfigError("gains.s", "must be positive");
    EstimatorGains g{cfg.gains_k, cfg.gains_gamma_bar, cfg.gains_s};
    g.validate();
    if (!(cfg.est_internal_dt > 0.0))
        throw ConfigError("estimator.internal_dt", "must be positive");
    if (!(cfg.est_emit_dt > 0.0)) throw ConfigError("estimator.emit_dt", "must be positive");
    if (!(cfg.est_innovation_guard > 0.0))
        throw ConfigError("estimator.innovation_guard", "must be positive");
    if (!(cfg.est_gap_factor > 0.0))
        throw ConfigError("estimator.gap_factor", "must be positive");
    if (!(cfg.det_v_min > 0.0)) throw ConfigError("detection.v_min", "must be positive");
    if (!(cfg.det_v_min < cfg.det_v_max))
        throw ConfigError("detection.v_min", "must be below detection.v_max");
    if (!(cfg.det_gamma_f > 0.0)) throw ConfigError("detection.gamma_f", "must be positive");
    if (!(cfg.det_debounce >= 0.0)) throw ConfigError("detection.debounce", "must be >= 0");
    validate_injections(cfg.injections);
    parse_utc(cfg.epoch_utc, "epoch", 0);
}

Eigen::Vector2d parse_vec2(const std::string& value, const std::string& key,
                           const std::string& source, long line) {
    const auto parts = split(trim(value), ' ');
    if (parts.size() != 2)
        throw ParseError(source, line, "'" + key + "' expects two numbers");
    return {parse_double(parts[0], source, line), parse_double(parts[1], source, line)};
}

bool parse_bool(const std::string& value, const std::string& key, const std::string& source,
                long line) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw ParseError(source, line, "'" + key + "' expects a boolean");
}

std::vector<IndexedValue> sorted_dense(const std::map<int, IndexedValue>& m,
                                       const std::string& key, const std::string& source) {
    std::vector<IndexedValue> out;
    int expected = 1;
    for (const auto& [idx, v] : m) {
        if (idx != expected)
            throw ParseError(source, v.line,
                             "'" + key + "." + std::to_string(idx) +
                                 "' indices must be contiguous from 1");
        out.push_back(v);
        ++expected;
    }
    return out;
}

}  // namespace

RunConfig load_config_stream(std::istream& in, const std::string& source) {
    RunConfig cfg;
    LineReader r{in, source};

    std::map<int, IndexedValue> centers, sigmas, waypoints, knots, theta_cols, injections;

    std::string line;
    bool have_version = false;
    bool any_content = false;
    while (r.next(line)) {
        if (line[0] == '#') {
            HeaderDirective d;
            if (parse_directive(line, d) && d.key == "version") {
                if (d.value != kConfigVersion)
                    throw ParseError(source, r.line_no,
                                     "unsupported version '" + d.value + "', expected '" +
                                         std::string(kConfigVersion) + "'");
                have_version = true;
            }
            continue;
        }
        any_content = true;
        if (!have_version)
            throw ParseError(source, r.line_no,
                             "expected '#version glider-config 1' before settings");

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(source, r.line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError(source, r.line_no, "expected 'key = value'");
        const long ln = r.line_no;

        auto indexed = [&](const std::string& prefix,
                           std::map<int, IndexedValue>& dst) -> bool {
            if (key.size() <= prefix.size() + 1 || key.compare(0, prefix.size(), prefix) != 0 ||
                key[prefix.size()] != '.')
                return false;
            const std::string idx_str = key.substr(prefix.size() + 1);
            int idx = 0;
            const auto res = std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), idx);
            if (res.ec != std::errc() || res.ptr != idx_str.data() + idx_str.size() || idx < 1)
                throw ParseError(source, ln, "bad index in '" + key + "'");
            if (!dst.emplace(idx, IndexedValue{idx, value, ln}).second)
                throw ParseError(source, ln, "duplicate key '" + key + "'");
            return true;
        };

        try {
            if (key == "scenario.id") cfg.scenario_id = value;
            else if (key == "epoch") cfg.epoch_utc = value;
            else if (key == "frame.lat0") cfg.frame_lat0 = parse_double(value, source, ln);
            else if (key == "frame.lon0") cfg.frame_lon0 = parse_double(value, source, ln);
            else if (key == "basis.count")
                cfg.basis_count = static_cast<int>(parse_double(value, source, ln));
            else if (key == "basis.sigma") cfg.basis_sigma = parse_double(value, source, ln);
            else if (key == "basis.omega") cfg.basis_omega = parse_double(value, source, ln);
            else if (key == "basis.phase") cfg.basis_phase = parse_double(value, source, ln);
            else if (key == "basis.grid_inset")
                cfg.basis_grid_inset = parse_double(value, source, ln);
            else if (key == "coverage.floor")
                cfg.coverage_floor = parse_double(value, source, ln);
            else if (indexed("basis.center", centers)) {}
            else if (indexed("basis.sigma", sigmas)) {}
            else if (key == "sim.v_true") cfg.sim_v_true = parse_double(value, source, ln);
            else if (key == "sim.duration") cfg.sim_duration = parse_double(value, source, ln);
            else if (key == "sim.dt") cfg.sim_dt = parse_double(value, source, ln);
            else if (key == "sim.surfacing_interval")
                cfg.sim_surfacing_interval = parse_double(value, source, ln);
            else if (key == "sim.segment_subsample")
                cfg.sim_segment_subsample = static_cast<int>(parse_double(value, source, ln));
            else if (key == "sim.include_segment_samples")
                cfg.sim_include_segment_samples = parse_bool(value, key, source, ln);
            else if (key == "sim.seed")
                cfg.sim_seed = static_cast<std::uint64_t>(parse_double(value, source, ln));
            else if (key == "sim.noise.position_std")
                cfg.sim_noise_position_std = parse_double(value, source, ln);
            else if (key == "sim.noise.heading_std")
                cfg.sim_noise_heading_std = parse_double(value, source, ln);
            else if (key == "sim.arrival_radius")
                cfg.sim_arrival_radius = parse_double(value, source, ln);
            else if (indexed("sim.waypoint", waypoints)) {}
            else if (indexed("sim.heading", knots)) {}
            else if (indexed("sim.flow.theta", theta_cols)) {}
            else if (key == "sim.flow.draw_magnitude")
                cfg.flow_draw_magnitude = parse_double(value, source, ln);
            else if (key == "gains.k") {
                const auto parts = split(value, ' ');
                if (parts.size() == 1) {
                    const double k = parse_double(parts[0], source, ln);
                    cfg.gains_k = Eigen::Matrix2d::Identity() * k;
                } else if (parts.size() == 4) {
                    cfg.gains_k << parse_double(parts[0], source, ln),
                        parse_double(parts[1], source, ln),
                        parse_double(parts[2], source, ln),
                        parse_double(parts[3], source, ln);
                } else {
                    throw ParseError(source, ln, "gains.k expects 1 or 4 numbers");
                }
            } else if (key == "gains.gamma_bar")
                cfg.gains_gamma_bar = parse_double(value, source, ln);
            else if (key == "gains.s") cfg.gains_s = parse_double(value, source, ln);
            else if (key == "estimator.v0") cfg.est_v0 = parse_double(value, source, ln);
            else if (key == "estimator.internal_dt")
                cfg.est_internal_dt = parse_double(value, source, ln);
            else if (key == "estimator.emit_dt")
                cfg.est_emit_dt = parse_double(value, source, ln);
            else if (key == "estimator.innovation_guard")
                cfg.est_innovation_guard = parse_double(value, source, ln);
            else if (key == "estimator.gap_factor")
                cfg.est_gap_factor = parse_double(value, source, ln);
            else if (key == "detection.v_min") cfg.det_v_min = parse_double(value, source, ln);
            else if (key == "detection.v_max") cfg.det_v_max = parse_double(value, source, ln);
            else if (key == "detection.gamma_f")
                cfg.det_gamma_f = parse_double(value, source, ln);
            else if (key == "detection.debounce")
                cfg.det_debounce = parse_double(value, source, ln);
            else if (key == "detection.burn_in")
                cfg.det_burn_in = parse_double(value, source, ln);
            else if (indexed("inject", injections)) {}
            else
                throw ParseError(source, ln, "unknown key '" + key + "'");
        } catch (const ConfigError& e) {
            throw ParseError(source, ln, e.what());
        }
    }

    if (!any_content && !have_version) return cfg;  // empty file: all defaults

    for (const auto& v : sorted_dense(centers, "basis.center", source))
        cfg.basis_centers.push_back(parse_vec2(v.value, "basis.center", source, v.line));
    for (const auto& v : sorted_dense(sigmas, "basis.sigma", source))
        cfg.basis_sigma_overrides.push_back(parse_double(v.value, source, v.line));
    for (const auto& v : sorted_dense(waypoints, "sim.waypoint", source))
        cfg.sim_waypoints.push_back(parse_vec2(v.value, "sim.waypoint", source, v.line));
    for (const auto& v : sorted_dense(knots, "sim.heading", source)) {
        const auto k = parse_vec2(v.value, "sim.heading", source, v.line);
        cfg.sim_heading_knots.push_back({k.x(), k.y()});
    }
    for (const auto& v : sorted_dense(theta_cols, "sim.flow.theta", source))
        cfg.flow_theta_cols.push_back(parse_vec2(v.value, "sim.flow.theta", source, v.line));
    for (const auto& v : sorted_dense(injections, "inject", source))
        cfg.injections.push_back(parse_injection_value(v.value, source, v.line));

    validate_config(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    auto in = open_in(path);
    return load_config_stream(in, path.string());
}

void write_config(const std::filesystem::path& path, const RunConfig& cfg) {
    validate_config(cfg);
    auto out = open_out(path);
    out << "#version " << kConfigVersion << "\n";
    out << "scenario.id = " << cfg.scenario_id << "\n";
    out << "epoch = " << cfg.epoch_utc << "\n";
    out << "frame.lat0 = " << fmt_double(cfg.frame_lat0) << "\n";
    out << "frame.lon0 = " << fmt_double(cfg.frame_lon0) << "\n";
    out << "basis.count = " << cfg.basis_count << "\n";
    out << "basis.sigma = " << fmt_double(cfg.basis_sigma) << "\n";
    out << "basis.omega = " << fmt_double(cfg.basis_omega) << "\n";
    out << "basis.phase = " << fmt_double(cfg.basis_phase) << "\n";
    for (std::size_t i = 0; i < cfg.basis_sigma_overrides.size(); ++i)
        out << "basis.sigma." << i + 1 << " = " << fmt_double(cfg.basis_sigma_overrides[i])
            << "\n";
    for (std::size_t i = 0; i < cfg.basis_centers.size(); ++i)
        out << "basis.center." << i + 1 << " = " << fmt_double(cfg.basis_centers[i].x()) << " "
            << fmt_double(cfg.basis_centers[i].y()) << "\n";
    out << "basis.grid_inset = " << fmt_double(cfg.basis_grid_inset) << "\n";
    out << "coverage.floor = " << fmt_double(cfg.coverage_floor) << "\n";
    out << "sim.v_true = " << fmt_double(cfg.sim_v_true) << "\n";
    out << "sim.duration = " << fmt_double(cfg.sim_duration) << "\n";
    out << "sim.dt = " << fmt_double(cfg.sim_dt) << "\n";
    out << "sim.surfacing_interval = " << fmt_double(cfg.sim_surfacing_interval) << "\n";
    out << "sim.segment_subsample = " << cfg.sim_segment_subsample << "\n";
    out << "sim.include_segment_samples = " << (cfg.sim_include_segment_samples ? 1 : 0)
        << "\n";
    out << "sim.seed = " << cfg.sim_seed << "\n";
    out << "sim.noise.position_std = " << fmt_double(cfg.sim_noise_position_std) << "\n";
    out << "sim.noise.heading_std = " << fmt_double(cfg.sim_noise_heading_std) << "\n";
    out << "sim.arrival_radius = " << fmt_double(cfg.sim_arrival_radius) << "\n";
    for (std::size_t i = 0; i < cfg.sim_waypoints.size(); ++i)
        out << "sim.waypoint." << i + 1 << " = " << fmt_double(cfg.sim_waypoints[i].x()) << " "
            << fmt_double(cfg.sim_waypoints[i].y()) << "\n";
    for (std::size_t i = 0; i < cfg.sim_heading_knots.size(); ++i)
        out << "sim.heading." << i + 1 << " = " << fmt_double(cfg.sim_heading_knots[i].t)
            << " " << fmt_double(cfg.sim_heading_knots[i].psi) << "\n";
    for (std::size_t i = 0; i < cfg.flow_theta_cols.size(); ++i)
        out << "sim.flow.theta." << i + 1 << " = " << fmt_double(cfg.flow_theta_cols[i].x())
            << " " << fmt_double(cfg.flow_theta_cols[i].y()) << "\n";
    out << "sim.flow.draw_magnitude = " << fmt_double(cfg.flow_draw_magnitude) << "\n";
    out << "gains.k = " << fmt_double(cfg.gains_k(0, 0)) << " " << fmt_double(cfg.gains_k(0, 1))
        << " " << fmt_double(cfg.gains_k(1, 0)) << " " << fmt_double(cfg.gains_k(1, 1)) << "\n";
    out << "gains.gamma_bar = " << fmt_double(cfg.gains_gamma_bar) << "\n";
    out << "gains.s = " << fmt_double(cfg.gains_s) << "\n";
    out << "estimator.v0 = " << fmt_double(cfg.est_v0) << "\n";
    out << "estimator.internal_dt = " << fmt_double(cfg.est_internal_dt) << "\n";
    out << "estimator.emit_dt = " << fmt_double(cfg.est_emit_dt) << "\n";
    out << "estimator.innovation_guard = " << fmt_double(cfg.est_innovation_guard) << "\n";
    out << "estimator.gap_factor = " << fmt_double(cfg.est_gap_factor) << "\n";
    out << "detection.v_min = " << fmt_double(cfg.det_v_min) << "\n";
    out << "detection.v_max = " << fmt_double(cfg.det_v_max) << "\n";
    out << "detection.gamma_f = " << fmt_double(cfg.det_gamma_f) << "\n";
    out << "detection.debounce = " << fmt_double(cfg.det_debounce) << "\n";
    out << "detection.burn_in = " << fmt_double(cfg.det_burn_in) << "\n";
    for (std::size_t i = 0; i < cfg.injections.size(); ++i) {
        const auto& a = cfg.injections[i];
        out << "inject." << i + 1 << " = " << to_string(a.kind) << " "
            << fmt_double(a.t_start) << " " << fmt_double(a.t_end) << " "
            << fmt_double(a.magnitude) << "\n";
    }
}

// ---------------------------------------------------------------------------
// Resolution
// ---------------------------------------------------------------------------

namespace {

// Twelve-sided loop around the origin. The 30-degree turns and legs about
// one surfacing interval long keep a segment's mean commanded heading close
// to its chord direction, which the sparse (per-surfacing) estimator relies
// on.
std::vector<Eigen::Vector2d> default_waypoints() {
    std::vector<Eigen::Vector2d> wps;
    const double radius = 5600.0;
    for (int k = 0; k < 12; ++k) {
        const double a = k * std::numbers::pi / 6.0;
        wps.emplace_back(radius * std::cos(a), radius * std::sin(a));
    }
    return wps;
}

}  // namespace

BasisSet resolved_basis(const RunConfig& cfg) {
    validate_config(cfg);
    BasisSet bs;
    std::vector<Eigen::Vector2d> centers = cfg.basis_centers;
    if (centers.empty()) {
        if (cfg.sim_waypoints.empty() && cfg.sim_heading_knots.empty()) {
            // Default octagon loop (see make_sim_config); grid spans its bbox.
        } else if (cfg.sim_waypoints.empty()) {
            throw ConfigError("basis.center",
                              "explicit centers are required with a heading-knot plan");
        }
        const auto& wps =
            cfg.sim_waypoints.empty() ? default_waypoints() : cfg.sim_waypoints;
        double x0 = wps.front().x(), x1 = x0, y0 = wps.front().y(), y1 = y0;
        for (const auto& w : wps) {
            x0 = std::min(x0, w.x());
            x1 = std::max(x1, w.x());
            y0 = std::min(y0, w.y());
            y1 = std::max(y1, w.y());
        }
        const double ix = cfg.basis_grid_inset * (x1 - x0);
        const double iy = cfg.basis_grid_inset * (y1 - y0);
        centers = {{x0 + ix, y0 + iy}, {x1 - ix, y0 + iy}, {x0 + ix, y1 - iy},
                   {x1 - ix, y1 - iy}};
        if (cfg.basis_count != 4)
            throw ConfigError("basis.center",
                              "auto grid places exactly 4 centers; give explicit centers "
                              "for basis.count != 4");
    }
    for (int i = 0; i < cfg.basis_count; ++i) {
        BasisFunction b;
        b.center = centers[i];
        b.width = cfg.basis_sigma_overrides.empty() ? cfg.basis_sigma
                                                    : cfg.basis_sigma_overrides[i];
        b.tidal_frequency = cfg.basis_omega;
        b.tidal_phase = cfg.basis_phase;
        bs.bases.push_back(b);
    }
    bs.validate();
    return bs;
}

FlowParameters resolved_theta(const RunConfig& cfg, const BasisSet& basis) {
    FlowParameters fp;
    fp.theta = Eigen::Matrix2Xd::Zero(2, basis.size());
    if (!cfg.flow_theta_cols.empty()) {
        for (int i = 0; i < basis.size(); ++i) fp.theta.col(i) = cfg.flow_theta_cols[i];
    } else if (cfg.flow_draw_magnitude > 0.0) {
        // Columns drawn uniformly in a disk of radius bound/N, so the flow
        // magnitude never exceeds the bound anywhere.
        std::mt19937_64 gen(cfg.sim_seed ^ 0x74686574ull);
        auto uniform = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
        const double r_max = cfg.flow_draw_magnitude / basis.size();
        for (int i = 0; i < basis.size(); ++i) {
            const double a = 2.0 * std::numbers::pi * uniform();
            const double r = r_max * std::sqrt(uniform());
            fp.theta.col(i) = Eigen::Vector2d(r * std::cos(a), r * std::sin(a));
        }
    }
    fp.validate(basis);
    return fp;
}

SimConfig make_sim_config(const RunConfig& cfg, const BasisSet& basis,
                          const FlowParameters& theta) {
    SimConfig sim;
    sim.true_flow = theta;
    sim.basis = basis;
    sim.v_true = cfg.sim_v_true;
    if (!cfg.sim_heading_knots.empty()) {
        sim.heading_plan.mode = HeadingPlan::Mode::piecewise_constant;
        sim.heading_plan.knots = cfg.sim_heading_knots;
    } else {
        sim.heading_plan.mode = HeadingPlan::Mode::waypoints;
        sim.heading_plan.waypoints =
            cfg.sim_waypoints.empty() ? default_waypoints() : cfg.sim_waypoints;
        sim.heading_plan.arrival_radius = cfg.sim_arrival_radius;
    }
    sim.duration = cfg.sim_duration;
    sim.dt = cfg.sim_dt;
    sim.surfacing_interval = cfg.sim_surfacing_interval;
    sim.segment_subsample = cfg.sim_segment_subsample;
    sim.rng_seed = cfg.sim_seed;
    sim.noise.position_std = cfg.sim_noise_position_std;
    sim.noise.heading_std = cfg.sim_noise_heading_std;
    sim.validate();
    return sim;
}

EstimatorConfig make_estimator_config(const RunConfig& cfg) {
    EstimatorConfig e;
    e.gains.K = cfg.gains_k;
    e.gains.gamma_bar = cfg.gains_gamma_bar;
    e.gains.s_gain = cfg.gains_s;
    e.v0 = cfg.est_v0 >= 0.0 ? cfg.est_v0 : 0.5 * (cfg.det_v_min + cfg.det_v_max);
    e.internal_dt = cfg.est_internal_dt;
    e.emit_dt = cfg.est_emit_dt;
    e.innovation_guard = cfg.est_innovation_guard;
    e.gap_factor = cfg.est_gap_factor;
    e.validate();
    return e;
}

DetectionConfig make_detection_config(const RunConfig& cfg) {
    DetectionConfig d;
    d.v_min = cfg.det_v_min;
    d.v_max = cfg.det_v_max;
    d.gamma_f = cfg.det_gamma_f;
    d.debounce = cfg.det_debounce;
    d.burn_in = cfg.det_burn_in;
    d.validate();
    return d;
}

// ---------------------------------------------------------------------------
// Report bundle
// ---------------------------------------------------------------------------

void write_report(const std::filesystem::path& out_dir, const EstimateSeries& series,
                  const std::vector<SegmentFlow>& segments, const DetectionResult& result,
                  const DetectionConfig& cfg, const DeploymentMeta& meta) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    FileHeader h;
    h.epoch_utc = meta.epoch_utc;
    h.has_origin = true;
    h.origin_lat = meta.origin_lat;
    h.origin_lon = meta.origin_lon;
    write_series(out_dir / "series.csv", {h, series});
    write_events(out_dir / "events.csv", result.events, meta.epoch_utc);

    {
        auto out = open_out(out_dir / "trajectory_comparison.csv");
        out << "t,x,y,x_hat,y_hat\n";
        for (const auto& s : series.samples)
            out << fmt_double(s.t) << "," << fmt_double(s.x_meas.x()) << ","
                << fmt_double(s.x_meas.y()) << "," << fmt_double(s.x_hat.x()) << ","
                << fmt_double(s.x_hat.y()) << "\n";
    }
    {
        auto out = open_out(out_dir / "clle.csv");
        out << "t,clle\n";
        for (const auto& s : series.samples)
            out << fmt_double(s.t) << "," << fmt_double(s.clle) << "\n";
    }
    {
        auto out = open_out(out_dir / "flow_comparison.csv");
        out << "t,u_glider,u_algo,v_glider,v_algo\n";
        std::size_t seg_i = 0;
        for (const auto& s : series.samples) {
            while (seg_i < segments.size() && segments[seg_i].t1 < s.t) ++seg_i;
            const bool covered = seg_i < segments.size() && segments[seg_i].t0 <= s.t &&
                                 s.t <= segments[seg_i].t1;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            const double ug = covered ? segments[seg_i].f_m.x() : nan;
            const double vg = covered ? segments[seg_i].f_m.y() : nan;
            out << fmt_double(s.t) << "," << fmt_double(ug) << "," << fmt_double(s.f_l.x())
                << "," << fmt_double(vg) << "," << fmt_double(s.f_l.y()) << "\n";
        }
    }
    {
        auto out = open_out(out_dir / "speed_band.csv");
        out << "t,v_l,v_min,v_max\n";
        for (const auto& s : series.samples)
            out << fmt_double(s.t) << "," << fmt_double(s.v_l) << "," << fmt_double(cfg.v_min)
                << "," << fmt_double(cfg.v_max) << "\n";
    }
    {
        auto out = open_out(out_dir / "summary.txt");
        const long long epoch = meta.epoch_utc.empty() ? 0 : parse_utc(meta.epoch_utc);
        out << "deployment: " << meta.scenario_id << "\n";
        out << "epoch: " << (meta.epoch_utc.empty() ? "n/a" : meta.epoch_utc) << "\n";
        out << "samples: " << series.size() << "\n";
        if (!series.empty()) {
            out << "span: " << fmt_double(series.samples.front().t) << " .. "
                << fmt_double(series.samples.back().t) << " s\n";
            out << "final clle: " << fmt_double(series.samples.back().clle) << " m\n";
            double max_clle = 0.0;
            for (const auto& s : series.samples) max_clle = std::max(max_clle, s.clle);
            out << "max clle: " << fmt_double(max_clle) << " m\n";
        }
        out << "burn-in: " << fmt_double(result.burn_in_effective) << " s\n";
        out << "speed range: [" << fmt_double(cfg.v_min) << ", " << fmt_double(cfg.v_max)
            << "] m/s\n";
        out << "gamma_f: " << fmt_double(cfg.gamma_f) << "\n";
        out << "events: " << result.events.size() << "\n";
        if (result.events.empty()) {
            out << "no anomaly detected\n";
        } else {
            for (const auto& ev : result.events)
                out << "  " << format_utc(epoch + std::llround(ev.t)) << "  "
                    << to_string(ev.kind) << "  v_l=" << fmt_double(ev.v_l)
                    << " m/s  p_e=" << fmt_double(ev.p_e) << "  " << ev.detail << "\n";
        }
    }
}

}  // namespace glider
