"""
命令行包
"""
