"""地理视频分析工作流引擎"""
