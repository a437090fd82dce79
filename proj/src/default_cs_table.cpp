#include "csched/contention.hpp"

namespace csched {

// Worst cases sit at 2 nodes x 4 GPUs for both jobs; other multi-node shapes
// are scaled down from them. Pairs not listed use the synthetic model.
std::string_view default_cs_table_text() {
  return R"(# target_model,target_nodes,target_gpus_per_node,coloc_model,coloc_nodes,coloc_gpus_per_node,cs
FSDP,2,2,MoE,2,2,1.61
FSDP,2,2,MoE,2,4,1.77
FSDP,2,2,MoE,2,6,1.65
FSDP,2,2,MoE,4,2,1.46
FSDP,2,2,MoE,4,4,1.58
FSDP,2,4,MoE,2,2,1.77
FSDP,2,4,MoE,2,4,1.96
FSDP,2,4,MoE,2,6,1.82
FSDP,2,4,MoE,4,2,1.58
FSDP,2,4,MoE,4,4,1.72
FSDP,2,6,MoE,2,2,1.65
FSDP,2,6,MoE,2,4,1.82
FSDP,2,6,MoE,2,6,1.69
FSDP,2,6,MoE,4,2,1.49
FSDP,2,6,MoE,4,4,1.61
FSDP,4,2,MoE,2,2,1.46
FSDP,4,2,MoE,2,4,1.58
FSDP,4,2,MoE,2,6,1.49
FSDP,4,2,MoE,4,2,1.35
FSDP,4,2,MoE,4,4,1.43
FSDP,4,4,MoE,2,2,1.58
FSDP,4,4,MoE,2,4,1.72
FSDP,4,4,MoE,2,6,1.61
FSDP,4,4,MoE,4,2,1.43
FSDP,4,4,MoE,4,4,1.54
MoE,2,2,FSDP,2,2,2.28
MoE,2,2,FSDP,2,4,2.60
MoE,2,2,FSDP,2,6,2.36
MoE,2,2,FSDP,4,2,1.96
MoE,2,2,FSDP,4,4,2.20
MoE,2,4,FSDP,2,2,2.60
MoE,2,4,FSDP,2,4,3.00
MoE,2,4,FSDP,2,6,2.70
MoE,2,4,FSDP,4,2,2.20
MoE,2,4,FSDP,4,4,2.50
MoE,2,6,FSDP,2,2,2.36
MoE,2,6,FSDP,2,4,2.70
MoE,2,6,FSDP,2,6,2.44
MoE,2,6,FSDP,4,2,2.02
MoE,2,6,FSDP,4,4,2.27
MoE,4,2,FSDP,2,2,1.96
MoE,4,2,FSDP,2,4,2.20
MoE,4,2,FSDP,2,6,2.02
MoE,4,2,FSDP,4,2,1.72
MoE,4,2,FSDP,4,4,1.90
MoE,4,4,FSDP,2,2,2.20
MoE,4,4,FSDP,2,4,2.50
MoE,4,4,FSDP,2,6,2.27
MoE,4,4,FSDP,4,2,1.90
MoE,4,4,FSDP,4,4,2.12
FSDP,2,2,IMG,2,2,1.22
FSDP,2,2,IMG,2,4,1.28
FSDP,2,2,IMG,2,6,1.24
FSDP,2,2,IMG,4,2,1.17
FSDP,2,2,IMG,4,4,1.21
FSDP,2,4,IMG,2,2,1.28
FSDP,2,4,IMG,2,4,1.35
FSDP,2,4,IMG,2,6,1.30
FSDP,2,4,IMG,4,2,1.21
FSDP,2,4,IMG,4,4,1.26
FSDP,2,6,IMG,2,2,1.24
FSDP,2,6,IMG,2,4,1.30
FSDP,2,6,IMG,2,6,1.25
FSDP,2,6,IMG,4,2,1.18
FSDP,2,6,IMG,4,4,1.22
FSDP,4,2,IMG,2,2,1.17
FSDP,4,2,IMG,2,4,1.21
FSDP,4,2,IMG,2,6,1.18
FSDP,4,2,IMG,4,2,1.13
FSDP,4,2,IMG,4,4,1.16
FSDP,4,4,IMG,2,2,1.21
FSDP,4,4,IMG,2,4,1.26
FSDP,4,4,IMG,2,6,1.22
FSDP,4,4,IMG,4,2,1.16
FSDP,4,4,IMG,4,4,1.20
IMG,2,2,FSDP,2,2,1.28
IMG,2,2,FSDP,2,4,1.34
IMG,2,2,FSDP,2,6,1.29
IMG,2,2,FSDP,4,2,1.21
IMG,2,2,FSDP,4,4,1.26
IMG,2,4,FSDP,2,2,1.34
IMG,2,4,FSDP,2,4,1.43
IMG,2,4,FSDP,2,6,1.37
IMG,2,4,FSDP,4,2,1.26
IMG,2,4,FSDP,4,4,1.32
IMG,2,6,FSDP,2,2,1.29
IMG,2,6,FSDP,2,4,1.37
IMG,2,6,FSDP,2,6,1.31
IMG,2,6,FSDP,4,2,1.22
IMG,2,6,FSDP,4,4,1.27
IMG,4,2,FSDP,2,2,1.21
IMG,4,2,FSDP,2,4,1.26
IMG,4,2,FSDP,2,6,1.22
IMG,4,2,FSDP,4,2,1.15
IMG,4,2,FSDP,4,4,1.19
IMG,4,4,FSDP,2,2,1.26
IMG,4,4,FSDP,2,4,1.32
IMG,4,4,FSDP,2,6,1.27
IMG,4,4,FSDP,4,2,1.19
IMG,4,4,FSDP,4,4,1.24
)";
}

}  // namespace csched
