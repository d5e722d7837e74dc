"""
Probstruct 结构概率论模拟器。

以事件结构、定理检查、经典模型与双缝量子模拟为核心的命令行工具。
"""
