#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stf/errors.hpp"

namespace stf {

enum class AgentType {
    kSmallVehicle = 1,
    kBigVehicle = 2,
    kPedestrian = 3,
    kMotorcyclist = 4,
    kBicyclist = 5,
    kOther = 6,
};

enum class MetricCategory { kVehicle, kPedestrian, kBike, kOther };

MetricCategory category_of(AgentType type);
AgentType agent_type_from_code(long long code);  // unknown codes map to kOther
const char* category_name(MetricCategory c);

/// One observed agent state at one frame (2 fps clock). z, size and heading
/// are carried through but unused by the model.
struct TrajectoryRecord {
    long long frame_id = 0;
    long long agent_id = 0;
    AgentType agent_type = AgentType::kOther;
    double x = 0.0, y = 0.0, z = 0.0;
    double length = 0.0, width = 0.0, height = 0.0;
    double heading = 0.0;
};

/// Fixed-shape scene tensor bundle over t_his + t_pred consecutive frames.
/// Masked-out (t, n) slots hold exactly 0.0. Agents are stored in ascending
/// agent_id order. An agent is a prediction target iff it is valid at the
/// final observation frame t_his - 1.
struct SceneWindow {
    int t_his = 0;
    int t_pred = 0;
    int n = 0;
    std::vector<double> positions;      // [(t_his+t_pred) * n * 2]
    std::vector<std::uint8_t> mask;     // [(t_his+t_pred) * n]
    std::vector<AgentType> agent_types;  // [n]
    std::vector<long long> agent_ids;    // [n]
    std::vector<long long> frame_ids;    // [t_his+t_pred]
    std::array<double, 2> anchor{0.0, 0.0};
    bool normalized = false;

    int frames() const { return t_his + t_pred; }
    bool valid(int t, int i) const { return mask[static_cast<std::size_t>(t) * n + i] != 0; }
    double px(int t, int i) const {
        return positions[(static_cast<std::size_t>(t) * n + i) * 2];
    }
    double py(int t, int i) const {
        return positions[(static_cast<std::size_t>(t) * n + i) * 2 + 1];
    }
    bool predicted(int i) const { return valid(t_his - 1, i); }
    int predicted_count() const;

    /// Checks the structural invariants (sizes, masked slots zeroed).
    void check() const;
};

/// Parse whitespace-separated 10-field lines (frame, agent, type, x, y, z,
/// length, width, height, heading). Preserves input order. A malformed line
/// raises ParseError naming its 1-based line number; nothing is skipped.
std::vector<TrajectoryRecord> parse_records(std::istream& is);
std::vector<TrajectoryRecord> parse_records_file(const std::string& path);
void write_records(const std::vector<TrajectoryRecord>& records, std::ostream& os);

struct WindowingConfig {
    int t_his = 6;
    int t_pred = 6;
    int n_max = 32;
    int stride = 1;
};

/// Slide fixed windows over contiguous frame runs. Windows with no valid
/// agent at the anchor frame are dropped; when more than n_max agents appear,
/// the agents nearest the anchor-frame centroid are kept (ties by agent_id).
/// Fewer than t_his + t_pred frames yields zero windows, not an error.
std::vector<SceneWindow> build_windows(const std::vector<TrajectoryRecord>& records,
                                       const WindowingConfig& cfg);

/// Translate all valid positions by minus the centroid of the valid agents at
/// the anchor frame. The anchor is stored for exact inversion.
SceneWindow normalize_window(const SceneWindow& w);
SceneWindow denormalize_window(const SceneWindow& w);

enum class MotionKind { kConstantVelocity, kConstantTurn, kApproachYield };

/// Seeded synthetic scene description. Agent types are assigned round-robin
/// over the five dataset classes plus `other`, so every metric category is
/// populated once agent_count >= 3. kApproachYield consumes agents in pairs.
struct ScenarioSpec {
    int agent_count = 4;
    std::vector<MotionKind> kinds = {MotionKind::kConstantVelocity, MotionKind::kConstantTurn};
    double speed_min = 0.5;  // m/s
    double speed_max = 2.0;
    double noise_sigma = 0.0;  // meters
    int duration = 20;         // frames at 2 fps
    std::uint64_t seed = 1;
    std::array<double, 2> origin{0.0, 0.0};

    void validate(int min_frames = 1) const;
};

std::vector<TrajectoryRecord> generate_synthetic(const ScenarioSpec& spec);

struct PredictionSet;  // model.hpp

/// Emit "frame_id agent_id x y" lines in global coordinates, sorted by
/// (frame_id, agent_id). Only prediction targets are written.
void write_predictions(const std::vector<SceneWindow>& windows,
                       const std::vector<PredictionSet>& predictions, std::ostream& os);

}  // namespace stf
