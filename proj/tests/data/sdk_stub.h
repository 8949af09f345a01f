/* Declarations of the stub accelerator SDK that generated sessions target.
   Used to syntax-check generated code; the implementation lives elsewhere. */
#ifndef SDK_STUB_H
#define SDK_STUB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  SDK_OK = 0,
  SDK_ORDER_VIOLATION = 1,
  SDK_BAD_MP = 2,
  SDK_UNKNOWN_OP = 3
} sdk_status;

typedef enum {
  SDK_ACT_RELU = 0,
  SDK_ACT_BATCHNORM = 1,
  SDK_ACT_POOL = 2,
  SDK_ACT_ADD = 3
} sdk_activation_kind;

typedef struct {
  long long c_in, c_out, h_out, w_out, k_h, k_w, stride, padding;
} sdk_conv_params;

typedef struct {
  long long m, k, n;
} sdk_fc_params;

typedef struct {
  int num_cores;
  double peak_gflops_per_core;
  double bandwidth_gbs;
  int bytes_per_element;
  double opcount_critical_gops;
  double gamma;
  int min_channel_partition;
} sdk_device_config;

typedef struct {
  int num_blocks;
  const double* block_latency_ms;
  double total_ms;
} sdk_report;

typedef struct sdk_op* sdk_op_t;
typedef struct sdk_fusion* sdk_fusion_t;
typedef struct sdk_session* sdk_session_t;

sdk_status sdk_create_conv_op(sdk_op_t* op, const sdk_conv_params* params);
sdk_status sdk_create_fc_op(sdk_op_t* op, const sdk_fc_params* params);
sdk_status sdk_create_activation_op(sdk_op_t* op, sdk_activation_kind kind);

sdk_status sdk_fusion_create(sdk_fusion_t* fusion);
sdk_status sdk_fusion_add_op(sdk_fusion_t fusion, sdk_op_t op);
sdk_status sdk_fusion_set_model_parallelism(sdk_fusion_t fusion, int mp);
sdk_status sdk_fusion_compile(sdk_fusion_t fusion);

sdk_status sdk_session_create(sdk_session_t* session, const sdk_device_config* config);
sdk_status sdk_session_add(sdk_session_t session, sdk_fusion_t fusion);
sdk_status sdk_session_forward(sdk_session_t session, const void* input, size_t input_bytes,
                               sdk_report* report);
void sdk_session_destroy(sdk_session_t session);

#ifdef __cplusplus
}
#endif

#endif
