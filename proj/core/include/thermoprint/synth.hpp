#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "thermoprint/image.hpp"
#include "thermoprint/minutiae.hpp"

namespace thermoprint {

/// Parameters of one synthetic identity. The vessel tree topology depends
/// only on identity_seed; individual samples add positional jitter and
/// intensity noise.
struct IdentitySpec {
  std::uint64_t identity_seed = 0;
  int branch_count = 6;
  int arm_length_min = 15;
  int arm_length_max = 40;
  double jitter = 2.0;
  int width = 416;
  int height = 544;

  // Throws ConfigError on invalid values, GeometryError when the face
  // ellipse cannot hold arms of the requested length.
  void validate() const;
};

namespace synth_levels {
inline constexpr int kBackground = 30;
inline constexpr int kFace = 200;
inline constexpr int kRidge = 120;
inline constexpr int kNoise = 6;  // uniform integer noise in [-kNoise, kNoise]
}  // namespace synth_levels

struct SynthSample {
  GrayImage image;
  // Tree endpoints (terminations) and branch points (bifurcations), in
  // canvas coordinates and tree order: entry k is the same node in every
  // sample of an identity.
  std::vector<MinutiaPoint> ground_truth;
};

SynthSample generate_sample(const IdentitySpec& spec, int sample_index);

struct ManifestEntry {
  std::string filename;
  int label = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// Default spec for identity `label` of a dataset seeded with master_seed.
IdentitySpec identity_spec(std::uint64_t master_seed, int label);

// Writes num_identities * samples_each P5 images plus manifest.csv into
// outdir and returns the manifest entries.
std::vector<ManifestEntry> generate_dataset(int num_identities, int samples_each,
                                            std::uint64_t master_seed,
                                            const std::filesystem::path& outdir);

// CSV with header "filename,label".
void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(std::istream& in);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

inline constexpr const char* kManifestName = "manifest.csv";

}  // namespace thermoprint
