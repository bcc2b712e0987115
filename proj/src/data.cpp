#include "stf/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "stf/model.hpp"
#include "stf/rng.hpp"

namespace stf {

MetricCategory category_of(AgentType type) {
    switch (type) {
        case AgentType::kSmallVehicle:
        case AgentType::kBigVehicle:
            return MetricCategory::kVehicle;
        case AgentType::kPedestrian:
            return MetricCategory::kPedestrian;
        case AgentType::kMotorcyclist:
        case AgentType::kBicyclist:
            return MetricCategory::kBike;
        case AgentType::kOther:
            break;
    }
    return MetricCategory::kOther;
}

AgentType agent_type_from_code(long long code) {
    switch (code) {
        case 1:
            return AgentType::kSmallVehicle;
        case 2:
            return AgentType::kBigVehicle;
        case 3:
            return AgentType::kPedestrian;
        case 4:
            return AgentType::kMotorcyclist;
        case 5:
            return AgentType::kBicyclist;
        default:
            return AgentType::kOther;
    }
}

const char* category_name(MetricCategory c) {
    switch (c) {
        case MetricCategory::kVehicle:
            return "vehicle";
        case MetricCategory::kPedestrian:
            return "pedestrian";
        case MetricCategory::kBike:
            return "bike";
        case MetricCategory::kOther:
            break;
    }
    return "other";
}

int SceneWindow::predicted_count() const {
    int c = 0;
    for (int i = 0; i < n; ++i) {
        if (predicted(i)) {
            ++c;
        }
    }
    return c;
}

void SceneWindow::check() const {
    const std::size_t slots = static_cast<std::size_t>(frames()) * n;
    if (positions.size() != slots * 2 || mask.size() != slots ||
        agent_types.size() != static_cast<std::size_t>(n) ||
        agent_ids.size() != static_cast<std::size_t>(n) ||
        frame_ids.size() != static_cast<std::size_t>(frames())) {
        throw ContractError("scene window: inconsistent buffer sizes");
    }
    for (int t = 0; t < frames(); ++t) {
        for (int i = 0; i < n; ++i) {
            if (!valid(t, i) && (px(t, i) != 0.0 || py(t, i) != 0.0)) {
                throw ContractError("scene window: masked slot holds a nonzero position");
            }
            if (valid(t, i) && (!std::isfinite(px(t, i)) || !std::isfinite(py(t, i)))) {
                throw ContractError("scene window: non-finite position");
            }
        }
    }
}

namespace {

double parse_field(const std::string& token, int line_no, int field) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (errno != 0 || end == token.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw ParseError("line " + std::to_string(line_no) + ": field " + std::to_string(field) +
                         " ('" + token + "') is not a number");
    }
    return v;
}

long long parse_id_field(const std::string& token, int line_no, int field) {
    const double v = parse_field(token, line_no, field);
    if (v != std::floor(v) || std::abs(v) > 4.6e18) {
        throw ParseError("line " + std::to_string(line_no) + ": field " + std::to_string(field) +
                         " ('" + token + "') is not an integer");
    }
    return static_cast<long long>(v);
}

}  // namespace

std::vector<TrajectoryRecord> parse_records(std::istream& is) {
    std::vector<TrajectoryRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ls >> tok) {
            tokens.push_back(tok);
        }
        if (tokens.empty()) {
            continue;
        }
        if (tokens.size() != 10) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 10 fields, got " +
                             std::to_string(tokens.size()));
        }
        TrajectoryRecord r;
        r.frame_id = parse_id_field(tokens[0], line_no, 1);
        r.agent_id = parse_id_field(tokens[1], line_no, 2);
        r.agent_type = agent_type_from_code(parse_id_field(tokens[2], line_no, 3));
        r.x = parse_field(tokens[3], line_no, 4);
        r.y = parse_field(tokens[4], line_no, 5);
        r.z = parse_field(tokens[5], line_no, 6);
        r.length = parse_field(tokens[6], line_no, 7);
        r.width = parse_field(tokens[7], line_no, 8);
        r.height = parse_field(tokens[8], line_no, 9);
        r.heading = parse_field(tokens[9], line_no, 10);
        if (r.frame_id < 0) {
            throw ParseError("line " + std::to_string(line_no) + ": negative frame id");
        }
        out.push_back(r);
    }
    return out;
}

std::vector<TrajectoryRecord> parse_records_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw IoError("records: cannot open '" + path + "'");
    }
    return parse_records(is);
}

void write_records(const std::vector<TrajectoryRecord>& records, std::ostream& os) {
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%lld %lld %d %.6f %.6f %.6f %.6f %.6f %.6f %.6f\n",
                      r.frame_id, r.agent_id, static_cast<int>(r.agent_type), r.x, r.y, r.z,
                      r.length, r.width, r.height, r.heading);
        os << buf;
    }
}

namespace {

struct AgentTrack {
    AgentType type = AgentType::kOther;
    // frame offset within the window -> (x, y)
    std::map<int, std::array<double, 2>> obs;
};

}  // namespace

std::vector<SceneWindow> build_windows(const std::vector<TrajectoryRecord>& records,
                                       const WindowingConfig& cfg) {
    if (cfg.t_his <= 0 || cfg.t_pred <= 0 || cfg.n_max <= 0 || cfg.stride <= 0) {
        throw ConfigError("build_windows: t_his, t_pred, n_max and stride must be positive");
    }
    std::map<long long, std::vector<const TrajectoryRecord*>> by_frame;
    for (const auto& r : records) {
        by_frame[r.frame_id].push_back(&r);
    }
    std::vector<long long> frames;
    frames.reserve(by_frame.size());
    for (const auto& [f, rs] : by_frame) {
        (void)rs;
        frames.push_back(f);
    }

    const int span = cfg.t_his + cfg.t_pred;
    std::vector<SceneWindow> out;

    // Maximal contiguous frame runs; windows never straddle a gap.
    std::size_t run_begin = 0;
    while (run_begin < frames.size()) {
        std::size_t run_end = run_begin + 1;
        while (run_end < frames.size() && frames[run_end] == frames[run_end - 1] + 1) {
            ++run_end;
        }
        const int run_len = static_cast<int>(run_end - run_begin);
        for (int start = 0; start + span <= run_len; start += cfg.stride) {
            const long long first_frame = frames[run_begin + start];

            std::map<long long, AgentTrack> tracks;
            for (int t = 0; t < span; ++t) {
                for (const TrajectoryRecord* r : by_frame.at(first_frame + t)) {
                    AgentTrack& tr = tracks[r->agent_id];
                    tr.type = r->agent_type;
                    tr.obs[t] = {r->x, r->y};
                }
            }

            // Anchor-frame centroid over agents valid there.
            const int anchor_t = cfg.t_his - 1;
            double cx = 0.0, cy = 0.0;
            int n_anchor = 0;
            for (const auto& [id, tr] : tracks) {
                (void)id;
                auto it = tr.obs.find(anchor_t);
                if (it != tr.obs.end()) {
                    cx += it->second[0];
                    cy += it->second[1];
                    ++n_anchor;
                }
            }
            if (n_anchor == 0) {
                continue;  // nothing to predict in this window
            }
            cx /= n_anchor;
            cy /= n_anchor;

            // Overflow policy: keep agents nearest the centroid, ties by id.
            // Agents absent at the anchor frame use their observation closest
            // in time to it (earlier frame wins a tie).
            std::vector<std::tuple<double, long long>> ranked;
            for (const auto& [id, tr] : tracks) {
                auto it = tr.obs.find(anchor_t);
                if (it == tr.obs.end()) {
                    int best_dt = span * 2;
                    for (const auto& [t, p] : tr.obs) {
                        (void)p;
                        const int dt = std::abs(t - anchor_t);
                        if (dt < best_dt) {
                            best_dt = dt;
                            it = tr.obs.find(t);
                        }
                    }
                }
                const double dx = it->second[0] - cx;
                const double dy = it->second[1] - cy;
                ranked.emplace_back(std::sqrt(dx * dx + dy * dy), id);
            }
            std::sort(ranked.begin(), ranked.end());
            if (static_cast<int>(ranked.size()) > cfg.n_max) {
                ranked.resize(static_cast<std::size_t>(cfg.n_max));
            }
            std::vector<long long> ids;
            ids.reserve(ranked.size());
            for (const auto& [d, id] : ranked) {
                (void)d;
                ids.push_back(id);
            }
            std::sort(ids.begin(), ids.end());

            SceneWindow w;
            w.t_his = cfg.t_his;
            w.t_pred = cfg.t_pred;
            w.n = static_cast<int>(ids.size());
            w.positions.assign(static_cast<std::size_t>(span) * w.n * 2, 0.0);
            w.mask.assign(static_cast<std::size_t>(span) * w.n, 0);
            w.agent_ids = ids;
            w.agent_types.resize(ids.size());
            w.frame_ids.resize(static_cast<std::size_t>(span));
            for (int t = 0; t < span; ++t) {
                w.frame_ids[static_cast<std::size_t>(t)] = first_frame + t;
            }
            for (int i = 0; i < w.n; ++i) {
                const AgentTrack& tr = tracks.at(ids[static_cast<std::size_t>(i)]);
                w.agent_types[static_cast<std::size_t>(i)] = tr.type;
                for (const auto& [t, p] : tr.obs) {
                    const std::size_t slot = static_cast<std::size_t>(t) * w.n + i;
                    w.mask[slot] = 1;
                    w.positions[slot * 2] = p[0];
                    w.positions[slot * 2 + 1] = p[1];
                }
            }
            w.check();
            out.push_back(std::move(w));
        }
        run_begin = run_end;
    }
    return out;
}

SceneWindow normalize_window(const SceneWindow& w) {
    if (w.normalized) {
        throw ContractError("normalize_window: window is already normalized");
    }
    const int anchor_t = w.t_his - 1;
    double cx = 0.0, cy = 0.0;
    int count = 0;
    for (int i = 0; i < w.n; ++i) {
        if (w.valid(anchor_t, i)) {
            cx += w.px(anchor_t, i);
            cy += w.py(anchor_t, i);
            ++count;
        }
    }
    if (count == 0) {
        throw EmptyWindowError("normalize_window: no valid agent at the anchor frame");
    }
    cx /= count;
    cy /= count;

    SceneWindow out = w;
    out.anchor = {cx, cy};
    out.normalized = true;
    for (int t = 0; t < w.frames(); ++t) {
        for (int i = 0; i < w.n; ++i) {
            if (!w.valid(t, i)) {
                continue;
            }
            const std::size_t slot = (static_cast<std::size_t>(t) * w.n + i) * 2;
            out.positions[slot] = w.positions[slot] - cx;
            out.positions[slot + 1] = w.positions[slot + 1] - cy;
        }
    }
    out.check();
    return out;
}

SceneWindow denormalize_window(const SceneWindow& w) {
    if (!w.normalized) {
        throw ContractError("denormalize_window: window is not normalized");
    }
    SceneWindow out = w;
    out.normalized = false;
    for (int t = 0; t < w.frames(); ++t) {
        for (int i = 0; i < w.n; ++i) {
            if (!w.valid(t, i)) {
                continue;
            }
            const std::size_t slot = (static_cast<std::size_t>(t) * w.n + i) * 2;
            out.positions[slot] = w.positions[slot] + w.anchor[0];
            out.positions[slot + 1] = w.positions[slot + 1] + w.anchor[1];
        }
    }
    out.anchor = {0.0, 0.0};
    return out;
}

void ScenarioSpec::validate(int min_frames) const {
    if (agent_count <= 0) {
        throw ConfigError("scenario: agent_count must be positive");
    }
    if (kinds.empty()) {
        throw ConfigError("scenario: at least one motion kind required");
    }
    if (duration < min_frames) {
        throw ConfigError("scenario: duration shorter than a window");
    }
    if (noise_sigma < 0.0) {
        throw ConfigError("scenario: noise sigma must be >= 0");
    }
    if (!(speed_min > 0.0) || speed_max < speed_min) {
        throw ConfigError("scenario: invalid speed range");
    }
}

namespace {

constexpr double kFrameDt = 0.5;  // 2 fps

struct AgentSizes {
    double length, width, height;
};

AgentSizes sizes_for(AgentType t) {
    switch (t) {
        case AgentType::kSmallVehicle:
            return {4.5, 1.9, 1.6};
        case AgentType::kBigVehicle:
            return {8.0, 2.5, 3.2};
        case AgentType::kPedestrian:
            return {0.5, 0.5, 1.7};
        case AgentType::kMotorcyclist:
            return {2.0, 0.8, 1.5};
        case AgentType::kBicyclist:
            return {1.8, 0.6, 1.5};
        case AgentType::kOther:
            break;
    }
    return {1.0, 1.0, 1.0};
}

}  // namespace

std::vector<TrajectoryRecord> generate_synthetic(const ScenarioSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    // Per-agent positions for every frame, filled kind by kind.
    const int frames = spec.duration;
    const int n = spec.agent_count;
    std::vector<std::vector<std::array<double, 2>>> paths(
        static_cast<std::size_t>(n),
        std::vector<std::array<double, 2>>(static_cast<std::size_t>(frames), {0.0, 0.0}));

    static const AgentType kTypeCycle[] = {AgentType::kSmallVehicle, AgentType::kPedestrian,
                                           AgentType::kBicyclist,    AgentType::kBigVehicle,
                                           AgentType::kMotorcyclist, AgentType::kOther};
    std::vector<AgentType> types(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        types[static_cast<std::size_t>(i)] = kTypeCycle[i % 6];
    }

    int agent = 0;
    std::size_t kind_idx = 0;
    while (agent < n) {
        const MotionKind kind = spec.kinds[kind_idx % spec.kinds.size()];
        ++kind_idx;
        const double speed = rng.uniform(spec.speed_min, spec.speed_max);
        const double ox = spec.origin[0] + rng.uniform(-20.0, 20.0);
        const double oy = spec.origin[1] + rng.uniform(-20.0, 20.0);
        if (kind == MotionKind::kConstantVelocity) {
            const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            const double vx = speed * std::cos(theta), vy = speed * std::sin(theta);
            for (int k = 0; k < frames; ++k) {
                paths[static_cast<std::size_t>(agent)][static_cast<std::size_t>(k)] = {
                    ox + vx * kFrameDt * k, oy + vy * kFrameDt * k};
            }
            ++agent;
        } else if (kind == MotionKind::kConstantTurn) {
            const double omega = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 0.5);
            const double radius = speed / std::abs(omega);
            const double phase = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            for (int k = 0; k < frames; ++k) {
                const double a = phase + omega * kFrameDt * k;
                paths[static_cast<std::size_t>(agent)][static_cast<std::size_t>(k)] = {
                    ox + radius * std::cos(a), oy + radius * std::sin(a)};
            }
            ++agent;
        } else {  // kApproachYield: a crossing pair, the second agent yields
            const double gap = rng.uniform(8.0, 16.0);
            double ax = ox - gap;
            for (int k = 0; k < frames; ++k) {
                paths[static_cast<std::size_t>(agent)][static_cast<std::size_t>(k)] = {ax, oy};
                ax += speed * kFrameDt;
            }
            if (agent + 1 < n) {
                const double speed2 = rng.uniform(spec.speed_min, spec.speed_max);
                double by = oy - gap;
                double bxref = ox - gap;
                for (int k = 0; k < frames; ++k) {
                    paths[static_cast<std::size_t>(agent + 1)][static_cast<std::size_t>(k)] = {ox,
                                                                                               by};
                    // Creep while the first agent is still short of the crossing.
                    const double factor = bxref < ox ? 0.2 : 1.0;
                    by += factor * speed2 * kFrameDt;
                    bxref += speed * kFrameDt;
                }
                agent += 2;
            } else {
                ++agent;
            }
        }
    }

    if (spec.noise_sigma > 0.0) {
        for (auto& path : paths) {
            for (auto& p : path) {
                p[0] += rng.normal(0.0, spec.noise_sigma);
                p[1] += rng.normal(0.0, spec.noise_sigma);
            }
        }
    }

    std::vector<TrajectoryRecord> out;
    out.reserve(static_cast<std::size_t>(frames) * n);
    for (int k = 0; k < frames; ++k) {
        for (int i = 0; i < n; ++i) {
            const auto& path = paths[static_cast<std::size_t>(i)];
            TrajectoryRecord r;
            r.frame_id = k;
            r.agent_id = i + 1;
            r.agent_type = types[static_cast<std::size_t>(i)];
            r.x = path[static_cast<std::size_t>(k)][0];
            r.y = path[static_cast<std::size_t>(k)][1];
            r.z = 0.0;
            const AgentSizes s = sizes_for(r.agent_type);
            r.length = s.length;
            r.width = s.width;
            r.height = s.height;
            const int kk = std::min(k, frames - 2);
            const double hx = path[static_cast<std::size_t>(kk + 1)][0] -
                              path[static_cast<std::size_t>(kk)][0];
            const double hy = path[static_cast<std::size_t>(kk + 1)][1] -
                              path[static_cast<std::size_t>(kk)][1];
            r.heading = (hx == 0.0 && hy == 0.0) ? 0.0 : std::atan2(hy, hx);
            out.push_back(r);
        }
    }
    return out;
}

void write_predictions(const std::vector<SceneWindow>& windows,
                       const std::vector<PredictionSet>& predictions, std::ostream& os) {
    if (windows.size() != predictions.size()) {
        throw ContractError("write_predictions: window/prediction count mismatch");
    }
    struct Row {
        long long frame, agent;
        double x, y;
    };
    std::vector<Row> rows;
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        const SceneWindow& w = windows[wi];
        const PredictionSet& p = predictions[wi];
        if (p.n != w.n || p.t_pred != w.t_pred) {
            throw ContractError("write_predictions: prediction shape does not match window " +
                                std::to_string(wi));
        }
        for (int t = 0; t < p.t_pred; ++t) {
            for (int i = 0; i < w.n; ++i) {
                if (!w.predicted(i)) {
                    continue;
                }
                rows.push_back(
                    {w.frame_ids[static_cast<std::size_t>(w.t_his + t)],
                     w.agent_ids[static_cast<std::size_t>(i)],
                     p.position(t, i, 0) + w.anchor[0], p.position(t, i, 1) + w.anchor[1]});
            }
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.frame, a.agent) < std::tie(b.frame, b.agent);
    });
    char buf[128];
    for (const Row& r : rows) {
        std::snprintf(buf, sizeof buf, "%lld %lld %.9f %.9f\n", r.frame, r.agent, r.x, r.y);
        os << buf;
    }
}

}  // namespace stf
