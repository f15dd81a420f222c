#pragma once

// Published reference tables used as acceptance targets: frontier allocation
// rows, max-epoch and joint-allocation grids, and the per-size architecture
// table for the parameter-count calibration.

#include <array>

namespace tables {

struct AllocationRowRef {
    double parameters;
    double flops;
    double tokens;
};

// Approach-1 frontier allocations.
inline constexpr std::array<AllocationRowRef, 9> kFrontierAllocations = {{
    {4e8, 9.46e19, 39.3e9},
    {1e9, 5.62e20, 93.5e9},
    {1e10, 4.96e22, 825.2e9},
    {67e9, 2.01e24, 5.0e12},
    {175e9, 1.30e25, 12.4e12},
    {280e9, 3.24e25, 19.3e12},
    {520e9, 1.08e26, 34.6e12},
    {1e12, 3.86e26, 64.2e12},
    {1e13, 3.41e28, 566.4e12},
}};

// Closed-form (parametric-fit) allocations for the same model sizes.
inline constexpr std::array<AllocationRowRef, 9> kClosedFormAllocations = {{
    {4e8, 1.06e20, 44.3e9},
    {1e9, 6.68e20, 111.2e9},
    {1e10, 6.74e22, 1.1e12},
    {67e9, 3.05e24, 7.6e12},
    {175e9, 2.09e25, 19.9e12},
    {280e9, 5.35e25, 31.8e12},
    {520e9, 1.85e26, 59.3e12},
    {1e12, 6.86e26, 114.3e12},
    {1e13, 6.93e28, 1153.9e12},
}};

// Max useful epochs per (N, U_D).
inline constexpr std::array<double, 9> kMaxEpochModelSizes = {
    4e8, 1e9, 1e10, 67e9, 175e9, 280e9, 520e9, 1e12, 1e13};
inline constexpr std::array<double, 9> kMaxEpochUniqueTokens = {
    1e7, 1e8, 1e9, 1e10, 1e11, 1e12, 1e13, 1e14, 1e15};
inline constexpr int kMaxEpochTable[9][9] = {
    {70, 175, 430, 1057, 2593, 6357, 15585, 38205, 93651},
    {42, 105, 260, 641, 1572, 3857, 9456, 23180, 56821},
    {11, 29, 73, 181, 447, 1098, 2693, 6603, 16187},
    {1, 9, 25, 63, 157, 388, 953, 2339, 5736},
    {1, 4, 14, 37, 93, 229, 564, 1385, 3398},
    {1, 1, 10, 28, 71, 177, 436, 1072, 2629},
    {1, 1, 7, 20, 50, 126, 311, 764, 1875},
    {1, 1, 4, 13, 35, 88, 217, 535, 1312},
    {1, 1, 1, 1, 9, 24, 61, 151, 373},
};

struct JointRowRef {
    double unique_tokens;
    double parameters;
    double epochs;
    double flops;
};

inline constexpr std::array<JointRowRef, 9> kJointAllocations = {{
    {1e7, 41e6, 247, 6.07e17},
    {1e8, 95e6, 356, 2.04e19},
    {1e9, 222e6, 569, 7.59e20},
    {1e10, 518e6, 910, 2.83e22},
    {1e11, 1.6e9, 1151, 1.11e24},
    {1e12, 3.7e9, 1842, 4.12e25},
    {1e13, 8.7e9, 2947, 1.54e27},
    {1e14, 20.2e9, 4715, 5.72e28},
    {1e15, 47.1e9, 7543, 2.13e30},
}};

struct ArchRowRef {
    double params_million;
    long d_model;
    long ffw_size;
    long kv_size;
    long n_heads;
    long n_layers;
};

inline constexpr std::array<ArchRowRef, 55> kArchitectures = {{
    {1, 128, 512, 32, 4, 3},
    {2, 224, 896, 32, 7, 4},
    {5, 288, 1152, 32, 7, 5},
    {7, 320, 1280, 32, 10, 6},
    {14, 448, 1792, 32, 7, 6},
    {25, 512, 2048, 64, 8, 8},
    {36, 576, 2304, 64, 9, 9},
    {49, 640, 2560, 64, 10, 10},
    {64, 640, 2560, 64, 10, 13},
    {79, 640, 2560, 64, 10, 16},
    {85, 768, 3072, 64, 12, 12},
    {106, 768, 3072, 64, 12, 15},
    {127, 768, 3072, 64, 12, 18},
    {135, 896, 3584, 64, 14, 14},
    {154, 896, 3584, 64, 14, 16},
    {173, 896, 3584, 64, 14, 18},
    {201, 1024, 4096, 64, 16, 16},
    {226, 1024, 4096, 64, 16, 18},
    {252, 1024, 4096, 64, 16, 20},
    {354, 1280, 5120, 128, 10, 18},
    {413, 1280, 5120, 128, 10, 21},
    {428, 1408, 5632, 128, 11, 18},
    {472, 1280, 5120, 128, 10, 24},
    {500, 1408, 5632, 128, 11, 21},
    {538, 1536, 6144, 128, 12, 19},
    {571, 1408, 5632, 128, 11, 24},
    {623, 1536, 6144, 128, 12, 22},
    {708, 1536, 6144, 128, 12, 25},
    {771, 1792, 7168, 128, 14, 20},
    {886, 1792, 7168, 128, 14, 23},
    {1002, 1792, 7168, 128, 14, 26},
    {1107, 2048, 8192, 128, 16, 22},
    {1250, 2176, 8704, 128, 17, 22},
    {1258, 2048, 8192, 128, 16, 25},
    {1409, 2048, 8192, 128, 16, 28},
    {1420, 2176, 8704, 128, 17, 25},
    {1529, 2304, 9216, 128, 18, 24},
    {1591, 2176, 8704, 128, 17, 28},
    {1784, 2304, 9216, 128, 18, 28},
    {2038, 2304, 9216, 128, 18, 32},
    {2045, 2560, 10240, 128, 20, 26},
    {2359, 2560, 10240, 128, 20, 30},
    {2674, 2560, 10240, 128, 20, 34},
    {3121, 2688, 10752, 128, 21, 36},
    {3426, 2816, 11264, 128, 22, 36},
    {3744, 2944, 11776, 128, 23, 36},
    {4077, 3072, 12288, 128, 24, 36},
    {6166, 3584, 14336, 128, 28, 40},
    {8456, 4096, 16384, 128, 32, 42},
    {10682, 4352, 17408, 128, 32, 47},
    {11211, 4608, 18432, 128, 36, 44},
    {11976, 4608, 18432, 128, 32, 47},
    {13343, 4864, 19456, 128, 32, 47},
    {14653, 4992, 19968, 128, 32, 49},
    {14785, 5120, 20480, 128, 40, 47},
}};

}  // namespace tables
