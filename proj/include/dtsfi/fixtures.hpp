#pragma once

// Bundled forwarding series for the three case-study posts (A at 8:41,
// B at 10:41, C at 17:51 on 2020-02-02) and the parameter values published
// alongside them. Elapsed labels are kept exactly as tabulated.

#include <string_view>

#include "dtsfi/dataset.hpp"
#include "dtsfi/models.hpp"

namespace dtsfi::fixtures {

inline constexpr std::string_view information_a_csv =
    "# info_id: A\n"
    "# post_time: 2020-02-02 08:41\n"
    "elapsed_hours,cumulative_count\n"
    "0,47\n10min,597\n20min,940\n30min,1208\n40min,1458\n50min,1691\n60min,1937\n70min,2182\n"
    "80min,2477\n90min,2952\n100min,3461\n110min,3917\n2h,4390\n3h,6366\n4h,7501\n5h,8281\n"
    "6h,8846\n7h,9293\n8h,9638\n9h,9954\n10h,10199\n11h,10435\n12h,10795\n13h,11138\n"
    "14h,11459\n15h,11812\n16h,12013\n17h,12088\n18h,12109\n19h,12119\n20h,12128\n21h,12136\n"
    "22h,12140\n23h,12146\n24h,12157\n25h,12171\n26h,12184\n";

inline constexpr std::string_view information_b_csv =
    "# info_id: B\n"
    "# post_time: 2020-02-02 10:41\n"
    "# note: the source table labels the 15th row '9h' a second time; it is read as 16h\n"
    "elapsed_hours,cumulative_count\n"
    "Around 2h,15\n3h,1281\n4h,2615\n5h,4013\n6h,4817\n7h,5322\n8h,5685\n"
    "9h,5932\n10h,6052\n11h,6152\n12h,6264\n13h,6317\n14h,6380\n15h,6401\n"
    "16h,6423\n17h,6434\n18h,6447\n19h,6454\n20h,6455\n21h,6456\n22h,6458\n"
    "23h,6460\n24h,6461\n25h,6465\n26h,6471\n";

inline constexpr std::string_view information_c_csv =
    "# info_id: C\n"
    "# post_time: 2020-02-02 17:51\n"
    "elapsed_hours,cumulative_count\n"
    "Around 9h,20\n10h,1180\n11h,4244\n12h,6235\n13h,7595\n14h,8572\n15h,9103\n"
    "16h,9381\n17h,9569\n18h,9642\n19h,9680\n20h,9700\n21h,9736\n22h,9764\n"
    "23h,9800\n24h,9864\n25h,9943\n26h,10006\n";

inline ForwardingDataset information_a() { return parse_dataset(information_a_csv); }
inline ForwardingDataset information_b() { return parse_dataset(information_b_csv); }
inline ForwardingDataset information_c() { return parse_dataset(information_c_csv); }

/// Hours between the posts of A and B, and of B and C.
inline constexpr double gap_a_to_b = 2.0;
inline constexpr double gap_b_to_c = 7.0 + 10.0 / 60.0;

namespace published {

/// Stand-alone phase of information B.
inline constexpr Phase1Params information_b_phase1{.beta1 = 1.7901e-4, .p1 = 0.0020, .alpha1 = 1.5757, .s10 = 5.6458e6};

/// Long-interval phase 2 of information C posted after B.
inline constexpr Phase2Params information_c_lti{.beta21 = 0.8994,
                                                .beta22 = 0.0023,
                                                .beta23 = 1.0871e-4,
                                                .m21 = 0.2468,
                                                .m22 = 1.9895,
                                                .m23 = 0.5559,
                                                .p2 = 2.9516e-4,
                                                .alpha2 = 0.9858,
                                                .s20 = 7.4439e6};

/// Early period of information A.
inline constexpr Phase1Params information_a_early{.beta1 = 8.2700e-5, .p1 = 0.9823, .alpha1 = 3.9986, .s10 = 5.1682e4};

/// Joint short-interval fit: later period of A together with B.
inline constexpr Phase1Params information_a_late{.beta1 = 3.6601e-4, .p1 = 0.0091, .alpha1 = 3.4777, .s10 = 7.4439e6};

inline constexpr Phase2Params information_b_sti{.beta21 = 0.0037,
                                                .beta22 = 0.8184,
                                                .beta23 = 6.8834e-5,
                                                .m21 = 0.0406,
                                                .m22 = 0.0109,
                                                .m23 = 0.1868,
                                                .p2 = 0.0788,
                                                .alpha2 = 1.9159,
                                                .s20 = 0.0};

} // namespace published

namespace calibrated {

// Refits of the bundled series with 32 restarts (dtsfi_calibrate); the same
// values are stored in data/table*.json.

/// Stand-alone phase of information A.
inline constexpr Phase1Params information_a{.beta1 = 1.354663037992492e-06, .p1 = 0.4371756495967727, .alpha1 = 52.42275604325243, .s10 = 88191438.0084226};

/// Stand-alone phase of information B.
inline constexpr Phase1Params information_b{.beta1 = 8.998730256616244e-05, .p1 = 0.19092827850334199, .alpha1 = 90.85083154053294, .s10 = 5292300.826402017};

/// Long-interval phase 2 of C after the calibrated B phase (alpha2 sits at its 0.1/h floor).
inline constexpr Phase2Params information_c_lti{.beta21 = 1.2330125547115883e-06,
                                                .beta22 = 9.715158370243195e-05,
                                                .beta23 = 0.001587575911448085,
                                                .m21 = 9.999999999999993,
                                                .m22 = 2.725142193866124,
                                                .m23 = 0.0005514377574870391,
                                                .p2 = 0.09999987764451987,
                                                .alpha2 = 0.1000007740950425,
                                                .s20 = 44199294.60570422};

/// Early window [0, 2 h] of information A.
inline constexpr Phase1Params information_ab_early{.beta1 = 6.595421783776832e-07, .p1 = 0.6749431229392159, .alpha1 = 38.46771780926923, .s10 = 86737202.46791029};

/// Joint short-interval fit: later period of A together with B.
inline constexpr Phase1Params information_ab_late{.beta1 = 2.474408905115264e-05, .p1 = 0.20602069828654515, .alpha1 = 9.964113573978194, .s10 = 2399603.9915660517};

inline constexpr Phase2Params information_ab_sti{.beta21 = 0.011062502381355475,
                                                 .beta22 = 1.659559270778778,
                                                 .beta23 = 0.00030836313158200856,
                                                 .m21 = 0.00010006399112147952,
                                                 .m22 = 9.839773913124674,
                                                 .m23 = 7.371900118966682,
                                                 .p2 = 0.001817954950326712,
                                                 .alpha2 = 9.771213007950236,
                                                 .s20 = 0.0};

} // namespace calibrated

} // namespace dtsfi::fixtures
